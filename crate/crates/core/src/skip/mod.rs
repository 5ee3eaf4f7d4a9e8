//! Adaptive event skipping.
//!
//! Two cyclic event trains with intervals `T_l <= T_h` drift against each
//! other by a constant amount `γ` per `T_h` interval. Given the offset
//! `φ = t_L − t_H` between a connection event of the shorter-interval train
//! (L) and one of the longer-interval train (H), the predictors compute how
//! many intervals `(k_l, k_h)` both trains can advance before the next pair
//! of connection events that may overlap, or before the pair of reference
//! changes. No pair skipped over can overlap.
//!
//! Overlap is judged on connection-event start offsets with a closed window
//! `|offset| <= d`, where `d` is the longer of the two event durations. The
//! window is conservative: the engine re-checks every executed pair on the
//! channel model, so an extra executed pair never changes results.
//!
//! All predictors assume `2·d < T_l`.

mod engine;
pub mod oracle;
mod pair;

pub use engine::{run_skipping, PredictionTrace, SkipManager};
pub use oracle::oracle_next_overlap;
pub use pair::{predict_pair, PairPrediction, PairState};

use std::fmt;

/// Drift direction of a pair of event trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `T_h` is a multiple of `T_l`: offsets never change.
    Constant,
    /// The offset to the next H event's left neighbour grows by `γ`.
    Growing,
    /// The offset to an H event's right neighbour shrinks by `γ`.
    Shrinking,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Constant => "constant",
            Mode::Growing => "growing",
            Mode::Shrinking => "shrinking",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GammaProcess {
    pub t_l: i64,
    pub t_h: i64,
    pub gamma: i64,
    pub mode: Mode,
}

/// Classifies the pair `(t_l, t_h)` and returns its per-`T_h` drift.
///
/// Shrinking iff `⌈T_h/T_l⌉·T_l − T_h > T_l/2` (strict), otherwise growing;
/// an exact multiple is reported as constant.
pub fn compute_gamma(t_l: u64, t_h: u64) -> GammaProcess {
    assert!(t_l > 0 && t_l <= t_h, "compute_gamma needs 0 < T_l <= T_h");
    let (t_l, t_h) = (t_l as i64, t_h as i64);
    let below = t_h - div_floor(t_h, t_l) * t_l;
    let above = div_ceil(t_h, t_l) * t_l - t_h;
    let (mode, gamma) = if below == 0 {
        (Mode::Constant, 0)
    } else if 2 * above > t_l {
        (Mode::Shrinking, below)
    } else {
        (Mode::Growing, above)
    };
    GammaProcess {
        t_l,
        t_h,
        gamma,
        mode,
    }
}

/// Outcome of one prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Skip {
    /// Advance L by `k_l` and H by `k_h` intervals.
    Finite { k_l: u64, k_h: u64 },
    /// The trains never overlap again; schedule nothing more for the pair.
    Never,
}

/// Intermediate offset corrections, kept for tracing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Corrections {
    pub k_p: Option<i64>,
    pub k_pp: Option<i64>,
    pub k_r: Option<i64>,
    pub k_s: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkipPrediction {
    pub skip: Skip,
    /// Which case produced the prediction, e.g. `"2e"`.
    pub case: &'static str,
    pub corrections: Corrections,
}

impl SkipPrediction {
    fn finite(k_l: i64, k_h: i64, case: &'static str, corrections: Corrections) -> Self {
        assert!(
            k_l >= 1 && k_h >= 1,
            "case {case} produced non-advancing prediction ({k_l}, {k_h}); offset outside the predictor domain"
        );
        Self {
            skip: Skip::Finite {
                k_l: k_l as u64,
                k_h: k_h as u64,
            },
            case,
            corrections,
        }
    }

    fn never(corrections: Corrections) -> Self {
        Self {
            skip: Skip::Never,
            case: "1-never",
            corrections,
        }
    }

    /// `(k_l, k_h)`, or `None` for the never-collide sentinel.
    pub fn counts(&self) -> Option<(u64, u64)> {
        match self.skip {
            Skip::Finite { k_l, k_h } => Some((k_l, k_h)),
            Skip::Never => None,
        }
    }
}

pub(crate) fn div_floor(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

pub(crate) fn div_ceil(a: i64, b: i64) -> i64 {
    -(-a).div_euclid(b)
}

fn within(x: i64, d: i64) -> bool {
    -d <= x && x <= d
}

/// Index of the first L event not entirely left of H event `k_h`.
fn first_l_reaching(k_h: i64, phi: i64, t_l: i64, t_h: i64, d: i64) -> i64 {
    div_ceil(k_h * t_h - phi - d, t_l)
}

/// Constant case (`γ = 0`).
///
/// The corrective shift for a negative offset uses `k_s·T_l`; with
/// `T_h = q·T_l` this selects the same residue as a `k_s·T_h` shift but keeps
/// `k_l` an index relative to the current L event.
pub fn predict_constant(phi: i64, t_l: i64, t_h: i64, d: i64) -> SkipPrediction {
    let mut c = Corrections::default();
    let mut phi = phi;
    let mut k_s = 0;
    if phi < -d {
        k_s = div_floor(-phi, t_l);
        phi += k_s * t_l;
        c.k_s = Some(k_s);
    }
    if within(phi, d) {
        return SkipPrediction::finite(t_h / t_l + k_s, 1, "1-match", c);
    }
    let k_r = div_ceil(t_h - phi - d, t_l);
    let phi_r = phi + k_r * t_l;
    c.k_r = Some(k_r);
    if t_h - d <= phi_r && phi_r <= t_h + d {
        SkipPrediction::finite(k_r + k_s, 1, "1-successor", c)
    } else {
        SkipPrediction::never(c)
    }
}

/// Growing case (cases 2a–2e).
pub fn predict_growing(phi: i64, t_l: i64, t_h: i64, d: i64, gamma: i64) -> SkipPrediction {
    let mut c = Corrections::default();
    if within(phi, d) {
        if phi + gamma <= d {
            // 2c: the next H event also matches.
            let k_l = div_ceil(t_h - phi - d, t_l);
            return SkipPrediction::finite(k_l, 1, "2c", c);
        }
        // 2d: the next H event falls between two L events.
        let k_pp = div_floor(t_h - phi, t_l);
        c.k_pp = Some(k_pp);
        let k_h = div_ceil(t_h - phi - k_pp * t_l - d, gamma) + 1;
        let k_l = first_l_reaching(k_h, phi, t_l, t_h, d);
        return SkipPrediction::finite(k_l, k_h, "2d", c);
    }
    // Last L event with offset to the next H event of at least −d.
    let k_p = div_floor(t_h - phi + d, t_l);
    c.k_p = Some(k_p);
    let phi_s = t_h - phi - k_p * t_l;
    if within(phi_s, d) {
        return SkipPrediction::finite(k_p, 1, "2a", c);
    }
    // 2b correction, then 2e.
    let phi = phi + k_p * t_l;
    let k_h = div_ceil(t_h - phi - d, gamma) + 1;
    let k_l = first_l_reaching(k_h, phi, t_l, t_h, d) + k_p;
    SkipPrediction::finite(k_l, k_h, "2e", c)
}

/// Shrinking case (correction 3a, cases 3b–3d).
///
/// Offsets of `T_l − d` or more are first reduced modulo `T_l`: the
/// shrinking right-neighbour offset of every later H event depends only on
/// `φ mod T_l`, and reducing keeps the prediction from stepping over an
/// overlap with an L event between the current one and the next H event.
pub fn predict_shrinking(phi: i64, t_l: i64, t_h: i64, d: i64, gamma: i64) -> SkipPrediction {
    let mut c = Corrections::default();
    let mut phi = phi;
    let mut k_p = 0;
    if phi < -d {
        k_p = div_ceil(-phi, t_l);
    } else if phi >= t_l - d {
        k_p = -div_floor(phi + d, t_l);
    }
    if k_p != 0 {
        phi += k_p * t_l;
        c.k_p = Some(k_p);
    }
    if within(phi, d) {
        if phi - gamma >= -d {
            return SkipPrediction::finite(t_h / t_l + k_p, 1, "3b", c);
        }
        let k_h = div_ceil(t_l + phi - d, gamma);
        let k_l = first_l_reaching(k_h, phi, t_l, t_h, d) + k_p;
        return SkipPrediction::finite(k_l, k_h, "3c", c);
    }
    let k_h = div_ceil(phi - d, gamma);
    let k_l = first_l_reaching(k_h, phi, t_l, t_h, d) + k_p;
    SkipPrediction::finite(k_l, k_h, "3d", c)
}

/// Re-anchoring step for offsets outside the predictor domain: either the
/// current L event overlaps or passes a later H event, or a later L event
/// overlaps the current H event. Exactly one train advances.
pub fn align(phi: i64, t_l: i64, t_h: i64, d: i64) -> Option<(u64, u64)> {
    if phi >= t_h - d {
        let b = div_floor(phi + d, t_h);
        return Some((0, b as u64));
    }
    if phi < -d {
        let a = div_ceil(-d - phi, t_l);
        if phi + a * t_l <= d {
            return Some((a as u64, 0));
        }
    }
    None
}

/// Full prediction for the pair `(T_l, T_h)` at offset `φ`: alignment, then
/// the case analysis for the pair's mode.
pub fn predict(phi: i64, t_l: u64, t_h: u64, d: i64) -> (GammaProcess, SkipPrediction) {
    let g = compute_gamma(t_l, t_h);
    if let Some((k_l, k_h)) = align(phi, g.t_l, g.t_h, d) {
        let p = SkipPrediction {
            skip: Skip::Finite { k_l, k_h },
            case: "align",
            corrections: Corrections::default(),
        };
        return (g, p);
    }
    let p = match g.mode {
        Mode::Constant => predict_constant(phi, g.t_l, g.t_h, d),
        Mode::Growing => predict_growing(phi, g.t_l, g.t_h, d, g.gamma),
        Mode::Shrinking => predict_shrinking(phi, g.t_l, g.t_h, d, g.gamma),
    };
    (g, p)
}

/// Number of H intervals that can be skipped while an offset `φ > d`
/// shrinks by `γ` per interval.
pub fn skip_quick_bound(phi: i64, d: i64, gamma: i64) -> i64 {
    div_floor(phi - d, gamma)
}

/// Connection events (and so packet pairs) of a network over `d_sim`.
pub fn total_packets(d_sim: u64, interval: u64) -> u64 {
    if d_sim == 0 {
        1
    } else {
        d_sim.div_ceil(interval)
    }
}
