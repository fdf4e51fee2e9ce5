//! Mixed-mode oscillation bookkeeping: extrema, SAO/LAO events, epochs and
//! `L^s` signatures.
//!
//! An event is a half-swing between consecutive extrema of the observable.
//! Epochs are a run of LAO swings followed by a run of SAO swings; an epoch
//! with `n_L` LAO and `n_S` SAO swings is written `ceil(n_L/2)^ceil(n_S/2)`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::Trajectory;

/// Default LAO threshold as a fraction of the largest swing.
pub const DEFAULT_SAO_THRESHOLD: f64 = 0.25;

/// Swings smaller than this fraction of the observable's range are noise.
const NOISE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `u = (x1 - x2) / 2`.
    Antisymmetric,
    /// One state channel (0..4 for `x1, x2, y1, y2`).
    Channel(usize),
}

impl Observable {
    fn eval(&self, s: &[f64; 4]) -> f64 {
        match *self {
            Observable::Antisymmetric => 0.5 * (s[0] - s[1]),
            Observable::Channel(i) => s[i],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub t: f64,
    pub value: f64,
    pub is_max: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    #[serde(rename = "SAO")]
    Sao,
    #[serde(rename = "LAO")]
    Lao,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntrySide {
    UPositive,
    UNegative,
}

impl EntrySide {
    fn of(u: f64) -> Self {
        if u >= 0.0 {
            EntrySide::UPositive
        } else {
            EntrySide::UNegative
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EntrySide::UPositive => "u_positive",
            EntrySide::UNegative => "u_negative",
        }
    }
}

/// A half-swing between two consecutive extrema.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Swing {
    pub t_start: f64,
    /// Time of the extremum that ends the swing.
    pub t: f64,
    pub amplitude: f64,
    /// Cell (1 or 2) whose fast variable moves more over the swing.
    pub leading_cell: u8,
    /// Sign of `u` at the end of the swing.
    pub entry_side: EntrySide,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub amplitude: f64,
    pub leading_cell: u8,
    pub entry_side: EntrySide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Epoch {
    pub t_start: f64,
    pub lao_swings: usize,
    pub sao_swings: usize,
    pub lao: u32,
    pub sao: u32,
    pub leading_cell: u8,
    pub entry_side: Option<EntrySide>,
    /// True when a later LAO closes the SAO run.
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmoSignature {
    pub events: Vec<Event>,
    pub epochs: Vec<Epoch>,
    /// Space-separated `L^s` terms of the complete epochs.
    pub signature_string: String,
    /// Whether consecutive epochs are led by alternating cells; `None` with fewer than two epochs.
    pub alternating_cells: Option<bool>,
    pub sao_counts_per_epoch: Vec<u32>,
    pub sao_threshold: f64,
    pub warning: Option<String>,
}

impl MmoSignature {
    pub fn n_complete_epochs(&self) -> usize {
        self.epochs.iter().filter(|e| e.complete).count()
    }

    pub fn has_both_kinds(&self) -> bool {
        let lao = self.events.iter().any(|e| e.kind == EventKind::Lao);
        let sao = self.events.iter().any(|e| e.kind == EventKind::Sao);
        lao && sao
    }

    /// CSV with header `t,kind,amplitude,leading_cell,entry_side`.
    pub fn write_events_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,kind,amplitude,leading_cell,entry_side")?;
        for e in &self.events {
            let kind = match e.kind {
                EventKind::Sao => "SAO",
                EventKind::Lao => "LAO",
            };
            writeln!(
                w,
                "{:.16e},{},{:.16e},{},{}",
                e.t,
                kind,
                e.amplitude,
                e.leading_cell,
                e.entry_side.as_str()
            )?;
        }
        Ok(())
    }
}

fn has_derivatives(traj: &Trajectory) -> bool {
    traj.derivs.len() == traj.t.len()
}

/// Local extrema of the observable.
///
/// Candidates come from a three-point sign test on successive differences
/// (plateaus are skipped). With stored derivatives the location is refined to
/// the root of the Hermite interpolant's derivative; otherwise a parabola
/// through the three samples is used.
pub fn extract_extrema(traj: &Trajectory, obs: Observable) -> Result<Vec<Extremum>> {
    let n = traj.len();
    if n < 3 {
        return Err(Error::Analysis(format!("need at least 3 samples, got {n}")));
    }
    let y: Vec<f64> = traj.states.iter().map(|s| obs.eval(s)).collect();
    let mut out = Vec::new();
    let mut last_sign = 0.0;
    let mut last_idx = 0usize;
    for k in 1..n {
        let d = y[k] - y[k - 1];
        if d == 0.0 {
            continue;
        }
        let sign = d.signum();
        if last_sign != 0.0 && sign != last_sign {
            // Extremum at sample k-1 (or the plateau ending there).
            let i = k - 1;
            out.push(refine(
                traj,
                obs,
                &y,
                last_idx.min(i),
                i,
                i + 1,
                last_sign > 0.0,
            ));
        }
        last_sign = sign;
        last_idx = k - 1;
    }
    Ok(out)
}

fn refine(
    traj: &Trajectory,
    obs: Observable,
    y: &[f64],
    a: usize,
    i: usize,
    b: usize,
    is_max: bool,
) -> Extremum {
    let sample = Extremum {
        t: traj.t[i],
        value: y[i],
        is_max,
    };
    if has_derivatives(traj) {
        let dobs = |t: f64| obs.eval(&traj.interpolate_derivative(t));
        let (mut lo, mut hi) = (traj.t[a.min(i.saturating_sub(1))], traj.t[b]);
        let (mut dlo, dhi) = (dobs(lo), dobs(hi));
        if dlo.signum() == dhi.signum() || dlo == 0.0 {
            return sample;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let dm = dobs(mid);
            if dm.signum() == dlo.signum() {
                lo = mid;
                dlo = dm;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let v = obs.eval(&traj.interpolate(t));
        let better = if is_max { v >= y[i] } else { v <= y[i] };
        return if better {
            Extremum {
                t,
                value: v,
                is_max,
            }
        } else {
            sample
        };
    }
    let (t0, t1, t2) = (traj.t[i - 1], traj.t[i], traj.t[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let d01 = (y1 - y0) / (t1 - t0);
    let d12 = (y2 - y1) / (t2 - t1);
    let c2 = (d12 - d01) / (t2 - t0);
    if c2 == 0.0 {
        return sample;
    }
    // y = y1 + d01 (t - t1) + c2 (t - t0)(t - t1)  => vertex
    let tv = 0.5 * (t0 + t1) - d01 / (2.0 * c2);
    if !(tv > t0 && tv < t2) {
        return sample;
    }
    let v = y1 + d01 * (tv - t1) + c2 * (tv - t0) * (tv - t1);
    Extremum {
        t: tv,
        value: v,
        is_max,
    }
}

/// Remove swings below the noise floor and restore max/min alternation.
fn denoise(ext: Vec<Extremum>, floor: f64) -> Vec<Extremum> {
    let mut out: Vec<Extremum> = Vec::with_capacity(ext.len());
    for e in ext {
        if let Some(last) = out.last().copied() {
            if last.is_max == e.is_max {
                let keep_new = if e.is_max {
                    e.value > last.value
                } else {
                    e.value < last.value
                };
                if keep_new {
                    *out.last_mut().unwrap() = e;
                }
                continue;
            }
            if (e.value - last.value).abs() < floor {
                out.pop();
                continue;
            }
        }
        out.push(e);
    }
    out
}

/// Half-swings between consecutive extrema, with the leading cell of each.
pub fn swings(traj: &Trajectory, obs: Observable) -> Result<Vec<Swing>> {
    let ext = extract_extrema(traj, obs)?;
    let y: Vec<f64> = traj.states.iter().map(|s| obs.eval(s)).collect();
    let range = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - y.iter().cloned().fold(f64::INFINITY, f64::min);
    let ext = denoise(ext, NOISE_FLOOR * range);
    let mut out = Vec::with_capacity(ext.len());
    for w in ext.windows(2) {
        let (a, b) = (w[0], w[1]);
        let i0 = traj.t.partition_point(|&t| t < a.t);
        let i1 = traj
            .t
            .partition_point(|&t| t <= b.t)
            .max(i0 + 1)
            .min(traj.len());
        let mut r = [(f64::INFINITY, f64::NEG_INFINITY); 2];
        for s in &traj.states[i0.saturating_sub(1)..i1] {
            for c in 0..2 {
                r[c].0 = r[c].0.min(s[c]);
                r[c].1 = r[c].1.max(s[c]);
            }
        }
        let leading_cell = if r[0].1 - r[0].0 >= r[1].1 - r[1].0 {
            1
        } else {
            2
        };
        let u_end = Observable::Antisymmetric.eval(&state_at(traj, b.t));
        out.push(Swing {
            t_start: a.t,
            t: b.t,
            amplitude: (b.value - a.value).abs(),
            leading_cell,
            entry_side: EntrySide::of(u_end),
        });
    }
    Ok(out)
}

/// Hermite interpolation when derivatives are stored, linear otherwise.
fn state_at(traj: &Trajectory, t: f64) -> [f64; 4] {
    if has_derivatives(traj) {
        return traj.interpolate(t);
    }
    let k = traj
        .t
        .partition_point(|&ti| ti <= t)
        .clamp(1, traj.len() - 1);
    let (t0, t1) = (traj.t[k - 1], traj.t[k]);
    let a = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
    let (s0, s1) = (traj.states[k - 1], traj.states[k]);
    std::array::from_fn(|i| s0[i] + a * (s1[i] - s0[i]))
}

fn half_count(n: usize) -> u32 {
    n.div_ceil(2) as u32
}

/// Classify swings into SAO/LAO events, group them into epochs and build the signature.
pub fn classify_mmo(sw: &[Swing], sao_threshold: f64) -> MmoSignature {
    let mut sig = MmoSignature {
        events: Vec::new(),
        epochs: Vec::new(),
        signature_string: String::new(),
        alternating_cells: None,
        sao_counts_per_epoch: Vec::new(),
        sao_threshold,
        warning: None,
    };
    let max_amp = sw.iter().map(|s| s.amplitude).fold(0.0, f64::max);
    if sw.is_empty() || max_amp == 0.0 {
        sig.warning = Some("no oscillations found".into());
        return sig;
    }
    let cut = sao_threshold * max_amp;
    sig.events = sw
        .iter()
        .map(|s| Event {
            t: s.t,
            kind: if s.amplitude >= cut {
                EventKind::Lao
            } else {
                EventKind::Sao
            },
            amplitude: s.amplitude,
            leading_cell: s.leading_cell,
            entry_side: s.entry_side,
        })
        .collect();

    // Skip SAOs before the first LAO, then alternate LAO runs and SAO runs.
    let ev = &sig.events;
    let mut k = ev
        .iter()
        .position(|e| e.kind == EventKind::Lao)
        .unwrap_or(ev.len());
    while k < ev.len() {
        let start = k;
        while k < ev.len() && ev[k].kind == EventKind::Lao {
            k += 1;
        }
        let n_lao = k - start;
        let sao_start = k;
        while k < ev.len() && ev[k].kind == EventKind::Sao {
            k += 1;
        }
        let n_sao = k - sao_start;
        sig.epochs.push(Epoch {
            t_start: sw[start].t_start,
            lao_swings: n_lao,
            sao_swings: n_sao,
            lao: half_count(n_lao),
            sao: half_count(n_sao),
            leading_cell: ev[start].leading_cell,
            entry_side: (n_sao > 0).then(|| ev[sao_start].entry_side),
            complete: k < ev.len(),
        });
    }
    let complete: Vec<&Epoch> = sig.epochs.iter().filter(|e| e.complete).collect();
    sig.signature_string = complete
        .iter()
        .map(|e| format!("{}^{}", e.lao, e.sao))
        .collect::<Vec<_>>()
        .join(" ");
    sig.sao_counts_per_epoch = complete.iter().map(|e| e.sao).collect();
    if sig.epochs.len() >= 2 {
        sig.alternating_cells = Some(
            sig.epochs
                .windows(2)
                .all(|w| w[0].leading_cell != w[1].leading_cell),
        );
    } else {
        sig.warning = Some("fewer than two LAO epochs; alternation undefined".into());
    }
    if !sig.events.iter().any(|e| e.kind == EventKind::Sao) {
        sig.warning = Some("no small-amplitude oscillations".into());
    }
    sig
}

/// Extract swings from a trajectory and classify them.
pub fn signature(traj: &Trajectory, obs: Observable, sao_threshold: f64) -> Result<MmoSignature> {
    Ok(classify_mmo(&swings(traj, obs)?, sao_threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_fn<F: Fn(f64) -> [f64; 4]>(f: F, t0: f64, t1: f64, n: usize) -> Trajectory {
        let mut tr = Trajectory::<4>::default();
        for k in 0..n {
            let t = t0 + (t1 - t0) * k as f64 / (n - 1) as f64;
            tr.t.push(t);
            tr.states.push(f(t));
        }
        tr
    }

    #[test]
    fn sine_extrema_are_accurate() {
        let tr = from_fn(
            |t| [t.sin(), 0.0, 0.0, 0.0],
            0.0,
            20.0 * std::f64::consts::PI,
            1001,
        );
        let ext = extract_extrema(&tr, Observable::Channel(0)).unwrap();
        assert_eq!(ext.len(), 20);
        for e in &ext {
            let k = ((e.t - std::f64::consts::FRAC_PI_2) / std::f64::consts::PI).round();
            let exact = std::f64::consts::FRAC_PI_2 + k * std::f64::consts::PI;
            assert!((e.t - exact).abs() < 1e-4, "{} vs {}", e.t, exact);
        }
    }

    #[test]
    fn hermite_refinement_with_derivatives() {
        let mut tr = from_fn(|t| [t.sin(), 0.0, 0.0, 0.0], 0.0, 10.0, 160);
        tr.derivs = tr.t.iter().map(|t| [t.cos(), 0.0, 0.0, 0.0]).collect();
        let ext = extract_extrema(&tr, Observable::Channel(0)).unwrap();
        assert!((ext[0].t - std::f64::consts::FRAC_PI_2).abs() < 1e-5);
        assert!((ext[0].value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn constant_signal_has_no_events() {
        let tr = from_fn(|_| [0.3, 0.3, 0.1, 0.1], 0.0, 1.0, 50);
        assert!(extract_extrema(&tr, Observable::Antisymmetric)
            .unwrap()
            .is_empty());
        let s = signature(&tr, Observable::Antisymmetric, DEFAULT_SAO_THRESHOLD).unwrap();
        assert!(s.events.is_empty());
        assert!(s.warning.is_some());
    }

    #[test]
    fn too_few_samples() {
        let tr = from_fn(|t| [t, 0.0, 0.0, 0.0], 0.0, 1.0, 2);
        assert!(matches!(
            extract_extrema(&tr, Observable::Antisymmetric),
            Err(Error::Analysis(_))
        ));
    }

    /// Three small cycles then one large spike, repeated.
    fn spikes_and_wiggles(t: f64) -> f64 {
        let period = 4.0;
        let ph = t.rem_euclid(period);
        if ph < 3.0 {
            0.01 * (2.0 * std::f64::consts::PI * ph).sin()
        } else {
            (std::f64::consts::PI * (ph - 3.0)).sin()
        }
    }

    #[test]
    fn synthetic_one_three_signature() {
        let tr = from_fn(|t| [spikes_and_wiggles(t), 0.0, 0.0, 0.0], 0.0, 20.0, 20001);
        let s = signature(&tr, Observable::Channel(0), DEFAULT_SAO_THRESHOLD).unwrap();
        assert!(s.n_complete_epochs() >= 3);
        for term in s.signature_string.split(' ') {
            assert_eq!(term, "1^3");
        }
    }

    #[test]
    fn alternation_is_over_epochs() {
        let mk = |amp: f64, cell: u8| Swing {
            t_start: 0.0,
            t: 0.0,
            amplitude: amp,
            leading_cell: cell,
            entry_side: EntrySide::UPositive,
        };
        let sw = vec![
            mk(1.0, 1),
            mk(1.0, 1),
            mk(0.01, 1),
            mk(1.0, 2),
            mk(0.01, 2),
            mk(1.0, 1),
            mk(0.01, 1),
        ];
        let s = classify_mmo(&sw, 0.25);
        assert_eq!(s.alternating_cells, Some(true));
        assert_eq!(s.signature_string, "1^1 1^1");
        let sw2 = vec![mk(1.0, 1), mk(0.01, 1), mk(1.0, 1), mk(0.01, 1)];
        assert_eq!(classify_mmo(&sw2, 0.25).alternating_cells, Some(false));
        assert_eq!(classify_mmo(&sw2[..2], 0.25).alternating_cells, None);
    }

    #[test]
    fn denoise_drops_tiny_wiggles() {
        let e = |t: f64, v: f64, m: bool| Extremum {
            t,
            value: v,
            is_max: m,
        };
        let ext = vec![
            e(0.0, 1.0, true),
            e(1.0, 0.0, false),
            e(1.1, 1e-9, true),
            e(1.2, 0.0, false),
            e(2.0, 1.0, true),
        ];
        let d = denoise(ext, 1e-6);
        assert_eq!(d.len(), 3);
        assert!(d[0].is_max && !d[1].is_max && d[2].is_max);
    }
}
