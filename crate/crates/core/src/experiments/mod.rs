//! Experiments: witness families, lemma checks, threshold and measure
//! scans, and the disk-space model.

pub mod disk;
pub mod families;
pub mod lemmas;
pub mod scans;

pub use disk::{apply_hhat, make_f_hat, xp_norm_p, XpLabel, XpModel, XpSeq};
pub use families::{make_f_eps, make_f_tilde, make_f_w};
pub use lemmas::{check_est, check_lemma_w_bounds, check_stirling, EstReport, WBoundReport};
pub use scans::{
    carleson_boundedness_experiment, compactness_experiment, lambda_star, proposition_scan,
    threshold_scan,
};
