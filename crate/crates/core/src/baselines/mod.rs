//! Comparison classifiers: Gaussian naive Bayes, random forest, RBF SVM.

mod forest;
mod naive_bayes;
mod svm;

pub use forest::{
    gini, majority, predict_forest, train_forest, train_forest_with, DecisionTree, ForestConfig, RandomForestModel,
    TreeNode, TreeParams,
};
pub use naive_bayes::{predict_nb, train_nb, GaussianNbModel, VAR_SMOOTHING};
pub use svm::{kkt_violation, predict_svm, rbf_kernel, train_svm, SvmConfig, SvmModel};
