use std::fs;
use std::io;
use std::path::Path;

/// Seed for a named sub-stream of a master seed (SplitMix64 mixing).
///
/// Component tags used across the crate:
///
/// * fold assignment uses the master seed directly;
/// * training inside fold `f` uses `derive_seed(seed, 1000 + f)`, and the SVM
///   training cap subsamples with tag 1 under that fold seed;
/// * packet-count subsampling uses `derive_seed(seed, 1)`;
/// * standalone training (`ami-ids train`) uses `derive_seed(seed, 3)`;
/// * forest tree `t` uses `derive_seed(tree_seed, t)`.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    splitmix64(master ^ splitmix64(tag.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Map over indices `0..n`, in parallel when the `parallel` feature is on.
/// Results are always returned in index order.
pub(crate) fn map_indexed<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Write `contents` to a sibling temp file and rename it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp-{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}
