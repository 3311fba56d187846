/// Probabilities are clipped to `[CLIP_EPS, 1 - CLIP_EPS]` before the log.
pub const CLIP_EPS: f64 = 1e-12;

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let mut out = logits.to_vec();
    softmax_in_place(&mut out);
    out
}

pub(crate) fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

/// Binary cross-entropy of a predicted attack probability against the
/// true class.
pub fn cross_entropy(y: u8, y_hat: f64) -> f64 {
    let p = y_hat.clamp(CLIP_EPS, 1.0 - CLIP_EPS);
    let loss = if y == 1 { -p.ln() } else { -(1.0 - p).ln() };
    loss.max(0.0)
}
