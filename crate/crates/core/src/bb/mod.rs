//! Branch and bound over the own-slot powers.
//!
//! For fixed own-slot powers `p`, the reflection coefficients only have to be
//! feasible, and feasibility is monotone in `p`: raising `p_i` helps user `i`
//! and any reflector of slot `i` can scale its coefficient down to keep its
//! interference unchanged. A box `[lo, hi]` therefore contains a feasible
//! point iff `hi` is feasible, in which case every feasible point in it costs
//! at least `sum(lo)` and `hi` itself costs `sum(hi)`.
//!
//! The search keeps the live boxes in a best-first queue on the lower bound,
//! splits the most promising one along its longest edge, and prunes boxes
//! whose lower bound exceeds the incumbent.

mod feasibility;

pub use feasibility::{check_feasibility, sca_feasibility, sra_feasibility, FeasMode};

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use log::{debug, trace};

use crate::error::{Error, Result};
use crate::model::{
    is_feasible, oma_profile, oma_total, OracleStats, PowerProfile, SolveReport, SolveStatus, SystemInstance,
    DEFAULT_RATE_TOL,
};
use crate::sca::csv_err;
use crate::tri::TriMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Rect {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Rect {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len()
            || lo
                .iter()
                .zip(&hi)
                .any(|(l, h)| !(l.is_finite() && h.is_finite() && 0.0 <= *l && l <= h))
        {
            return Err(Error::InvalidInstance("rectangle needs 0 <= lo <= hi, finite".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    /// Index of the longest edge (the first one on ties).
    pub fn longest_edge(&self) -> usize {
        let mut best = 0;
        for k in 1..self.lo.len() {
            if self.hi[k] - self.lo[k] > self.hi[best] - self.lo[best] {
                best = k;
            }
        }
        best
    }

    /// Halves the box along its longest edge.
    pub fn split(&self) -> (Rect, Rect) {
        let k = self.longest_edge();
        let mid = 0.5 * (self.lo[k] + self.hi[k]);
        let mut left = self.clone();
        let mut right = self.clone();
        left.hi[k] = mid;
        right.lo[k] = mid;
        (left, right)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RectBounds {
    pub lower: f64,
    pub upper: f64,
    /// Reflection coefficients making `hi` feasible.
    pub witness: Option<TriMatrix>,
}

/// Vertex bounds of `rect`: `(sum(lo), sum(hi))` if `hi` is feasible, else
/// `(delta, delta)`.
pub fn rect_bounds(
    inst: &SystemInstance,
    rect: &Rect,
    mode: FeasMode,
    delta: f64,
    stats: &mut OracleStats,
) -> Result<RectBounds> {
    match check_feasibility(inst, &rect.hi, mode, stats) {
        Ok(eta) => Ok(RectBounds {
            lower: rect.lo.iter().sum(),
            upper: rect.hi.iter().sum(),
            witness: Some(eta),
        }),
        Err(Error::Infeasible) => Ok(RectBounds {
            lower: delta,
            upper: delta,
            witness: None,
        }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BbConfig {
    /// Absolute gap tolerance; `None` means `1e-3` times the OMA total.
    pub xi: Option<f64>,
    pub n_max: usize,
    /// Value assigned to boxes with an infeasible upper corner; `None` means
    /// `(c + 1)` times the OMA total, above any vertex sum in the initial box.
    pub delta: Option<f64>,
    pub feas_mode: FeasMode,
    /// Initial box is `[0, c * OMA powers]`, each face capped at the OMA
    /// total (no optimal own-slot power exceeds it).
    pub initial_box_scale: f64,
    pub prune: bool,
    /// How often the box may be doubled when the incumbent touches an
    /// uncapped upper face.
    pub max_box_doublings: usize,
}

impl Default for BbConfig {
    fn default() -> Self {
        Self {
            xi: None,
            n_max: 1000,
            delta: None,
            feas_mode: FeasMode::Sra,
            initial_box_scale: 2.0,
            prune: true,
            max_box_doublings: 16,
        }
    }
}

impl BbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.xi.is_some_and(|x| !(x > 0.0)) {
            return Err(Error::Config("xi must be positive".into()));
        }
        if !(self.initial_box_scale >= 1.0) {
            return Err(Error::Config("initial box scale must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BbTraceRow {
    pub iteration: usize,
    pub upper: f64,
    pub lower: f64,
    pub live: usize,
}

#[derive(Debug, Clone)]
pub struct BbSolution {
    /// Objective is the incumbent `U`; `lower_bound` is `L`.
    pub report: SolveReport,
    pub trace: Vec<BbTraceRow>,
    /// Box scale of the final run.
    pub box_scale: f64,
    pub xi: f64,
}

struct Node {
    lower: f64,
    volume: f64,
    id: u64,
    rect: Rect,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    /// Max-heap order: smallest lower bound first, then largest volume, then
    /// oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .lower
            .total_cmp(&self.lower)
            .then(self.volume.total_cmp(&other.volume))
            .then(other.id.cmp(&self.id))
    }
}

struct Incumbent {
    upper: f64,
    diag: Vec<f64>,
    eta: TriMatrix,
}

/// Upper corner of the initial box for scale `c`, and which faces are capped.
fn box_upper(inst: &SystemInstance, scale: f64) -> (Vec<f64>, Vec<bool>) {
    let cap = oma_total(inst);
    oma_profile(inst)
        .diagonal()
        .iter()
        .map(|p| {
            if scale * p >= cap {
                (cap, true)
            } else {
                (scale * p, false)
            }
        })
        .unzip()
}

/// Fraction of an uncapped box edge, measured from its upper face, in which
/// the final incumbent counts as touching the face.
const FACE_MARGIN: f64 = 0.25;

/// Runs the search. If the incumbent ends near an uncapped upper face of the
/// initial box, the box may have been too small and the search
/// is repeated with twice the box (up to `cfg.max_box_doublings` times).
pub fn bb_solve(inst: &SystemInstance, cfg: &BbConfig) -> Result<BbSolution> {
    cfg.validate()?;
    let mut scale = cfg.initial_box_scale;
    let mut stats = OracleStats::default();
    for attempt in 0..=cfg.max_box_doublings {
        let run = bb_run(inst, cfg, scale, &mut stats)?;
        let (hi, capped) = box_upper(inst, scale);
        let touches = (0..hi.len()).any(|m| !capped[m] && run.1[m] >= (1.0 - FACE_MARGIN) * hi[m]);
        if !touches || cfg.n_max == 0 || attempt == cfg.max_box_doublings {
            let mut sol = run.0;
            sol.report.stats = stats;
            return Ok(sol);
        }
        debug!("incumbent on the box face, doubling the box to {}", 2.0 * scale);
        scale *= 2.0;
    }
    unreachable!("loop returns on the last attempt")
}

fn bb_run(
    inst: &SystemInstance,
    cfg: &BbConfig,
    scale: f64,
    stats: &mut OracleStats,
) -> Result<(BbSolution, Vec<f64>)> {
    let n = inst.num_users();
    let oma = oma_total(inst);
    let xi = cfg.xi.unwrap_or(1e-3 * oma);
    let delta = cfg.delta.unwrap_or((scale + 1.0) * oma);
    let root = Rect::new(vec![0.0; n], box_upper(inst, scale).0)?;

    let mut next_id = 0u64;
    let mut heap = BinaryHeap::new();
    let mut incumbent: Option<Incumbent> = None;
    let mut upper = delta;

    let mut offer = |rect: Rect,
                     heap: &mut BinaryHeap<Node>,
                     incumbent: &mut Option<Incumbent>,
                     upper: &mut f64,
                     stats: &mut OracleStats|
     -> Result<()> {
        let b = rect_bounds(inst, &rect, cfg.feas_mode, delta, stats)?;
        if let Some(eta) = b.witness {
            if b.upper < *upper {
                *upper = b.upper;
                *incumbent = Some(Incumbent {
                    upper: b.upper,
                    diag: rect.hi.clone(),
                    eta,
                });
            }
        }
        heap.push(Node {
            lower: b.lower,
            volume: rect.volume(),
            id: next_id,
            rect,
        });
        next_id += 1;
        Ok(())
    };

    offer(root, &mut heap, &mut incumbent, &mut upper, stats)?;
    let lower_of = |heap: &BinaryHeap<Node>, upper: f64| heap.peek().map_or(upper, |n| n.lower.min(upper));
    let mut lower = lower_of(&heap, upper);
    let mut trace = vec![BbTraceRow {
        iteration: 0,
        upper,
        lower,
        live: heap.len(),
    }];
    let mut iterations = 0;

    while upper - lower > xi && iterations < cfg.n_max {
        let Some(node) = heap.pop() else { break };
        iterations += 1;
        let (a, b) = node.rect.split();
        offer(a, &mut heap, &mut incumbent, &mut upper, stats)?;
        offer(b, &mut heap, &mut incumbent, &mut upper, stats)?;
        if cfg.prune {
            heap.retain(|n| n.lower <= upper);
        }
        lower = lower.max(lower_of(&heap, upper));
        trace!(
            "bb iteration {iterations}: U = {upper:.12e}, L = {lower:.12e}, live = {}",
            heap.len()
        );
        trace.push(BbTraceRow {
            iteration: iterations,
            upper,
            lower,
            live: heap.len(),
        });
    }

    let status = if upper - lower <= xi {
        SolveStatus::Converged
    } else {
        SolveStatus::IterLimit
    };
    let (profile, diag) = match incumbent {
        Some(inc) => {
            let profile = PowerProfile::from_reflection(&inc.diag, &inc.eta)?;
            if !is_feasible(inst, &profile, DEFAULT_RATE_TOL) {
                return Err(Error::NumericalFailure(
                    "accepted witness fails the feasibility check".into(),
                ));
            }
            debug_assert_eq!(inc.upper, upper);
            (profile, inc.diag)
        }
        None => return Err(Error::Infeasible),
    };

    let report = SolveReport {
        objective: upper,
        profile,
        status,
        upper_bound: upper,
        lower_bound: lower,
        iterations,
        trace: trace.iter().map(|r| r.upper).collect(),
        stats: OracleStats::default(),
    };
    Ok((
        BbSolution {
            report,
            trace,
            box_scale: scale,
            xi,
        },
        diag,
    ))
}

/// Writes `iteration,upper,lower,live` rows.
pub fn write_trace_csv<W: Write>(trace: &[BbTraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "upper", "lower", "live"])
        .map_err(csv_err)?;
    for r in trace {
        w.write_record([
            r.iteration.to_string(),
            r.upper.to_string(),
            r.lower.to_string(),
            r.live.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
