//! Derived constants shared by the cover, cluster and APSP layers.

use serde::Serialize;

/// `log2(x)`, with values below 2 clamped so the result is at least 1.
pub fn log2g(x: f64) -> f64 {
    if x <= 2.0 {
        1.0
    } else {
        x.log2()
    }
}

/// `log2(x)` for budgets: 0 when `x <= 1`.
pub fn log2z(x: f64) -> f64 {
    if x <= 1.0 {
        0.0
    } else {
        x.log2()
    }
}

/// Constants of the cover layer, fixed from the initial weight `W`.
#[derive(Clone, Debug, Serialize)]
pub struct CoverConsts {
    pub d: u64,
    pub w: u64,
    pub log_w: f64,
    pub log_log_w: f64,
    /// Layer ratio used in the C2/C3 eligibility tests.
    pub kappa: f64,
    /// Number of class levels: classes are `S_0..S_r`.
    pub r: u32,
    /// Layer cap: some eligible layer exists below this index when the
    /// scan ball carries at most half the weight.
    pub cap: u64,
}

impl CoverConsts {
    /// `kappa = None` selects the default `64 log^2 W`.
    pub fn new(d: u64, w: u64, kappa: Option<f64>) -> Self {
        let log_w = log2g(w as f64);
        let log_log_w = log2g(log_w);
        let kappa = kappa.unwrap_or(64.0 * log_w * log_w);
        assert!(kappa > 0.0, "kappa must be positive");
        let r = 2 * (log_w / log_log_w).ceil() as u32;
        let classic = (2.0 * kappa * log_w * log_w).ceil() as u64;
        // every ineligible layer raises one of r+1 geometric sums by a
        // factor 1 + 1/kappa, each sum starting at 1 and bounded by W
        let per_type = ((w.max(1) as f64).ln() / (1.0 + 1.0 / kappa).ln()).floor() as u64 + 2;
        let counted = (r as u64 + 1) * per_type + 2;
        CoverConsts { d, w, log_w, log_log_w, kappa, r, cap: classic.max(counted) }
    }

    /// ProcCut explores at most this far before concluding Fail.
    pub fn scan_radius(&self) -> u64 {
        2 * self.cap * self.d
    }

    /// Strong diameter bound of a cluster created by a cut.
    pub fn diam_bound(&self) -> u64 {
        4 * self.cap * self.d
    }

    /// A flagged pair must be farther apart than this.
    pub fn flag_dist(&self) -> u64 {
        8 * self.cap * self.d
    }

    /// `beta_C(x) / w(x)` for a cluster of weight `wc`.
    pub fn budget_coef(&self, wc: u64) -> f64 {
        1.0 + log2z(wc as f64) / (self.log_w * self.log_w)
    }

    /// Lifetime cluster memberships allowed per regular vertex.
    pub fn membership_bound(&self) -> f64 {
        2f64.powi(self.r as i32) * self.log_w.ceil()
    }
}
