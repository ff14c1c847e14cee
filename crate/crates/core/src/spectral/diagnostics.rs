use std::fmt::Write as _;

use serde::Serialize;

use super::{SpectralScalar, Trajectory, TrajectoryStatus};
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// `M_0` or `M_1` along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MDiagnostic {
    pub order: u32,
    pub value: f64,
    /// `sup_t ‖∂_x^order u‖²`.
    pub sup_term: f64,
    /// `ν ∫ ‖Λ^{order+γ} u‖² dt` by the trapezoid rule on the samples.
    pub integral: f64,
    /// `|I_h - I_{2h}| / 3` from the samples with every other one dropped.
    pub quadrature_error: f64,
    pub t_final: f64,
    pub completed: bool,
}

/// `M_0 = sup ‖u‖² + ν∫‖Λ^γ u‖²`, `M_1 = sup ‖u_x‖² + ν∫‖Λ^{1+γ} u‖²`.
///
/// Order 1 is refused for trajectories that did not complete.
pub fn diagnostics_m<S: SpectralScalar>(traj: &Trajectory<S>, params: &ModelParams, order: u32) -> Result<MDiagnostic> {
    if order > 1 {
        return Err(Error::invalid(format!("order must be 0 or 1, got {order}")));
    }
    let completed = traj.status == TrajectoryStatus::Completed;
    if order == 1 && !completed {
        return Err(Error::invalid(format!(
            "M1 is undefined for a trajectory with status {}",
            traj.status
        )));
    }
    let nu = params.nu.to_f64();
    let gamma = params.gamma.to_f64();
    let o = order as f64;
    let mut sup: f64 = 0.0;
    let mut ts = Vec::with_capacity(traj.samples.len());
    let mut fs = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        let mut a = 0.0;
        let mut d = 0.0;
        for (i, c) in s.coeffs.iter().enumerate() {
            let k = (i + 1) as f64;
            let m = c.norm_sqr();
            a += k.powf(2.0 * o) * m;
            d += k.powf(2.0 * (o + gamma)) * m;
        }
        sup = sup.max(a);
        ts.push(s.t);
        fs.push(nu * d);
    }
    let full = trapezoid(&ts, &fs);
    let coarse = {
        let mut idx: Vec<usize> = (0..ts.len()).step_by(2).collect();
        if *idx.last().unwrap_or(&0) != ts.len() - 1 {
            idx.push(ts.len() - 1);
        }
        let t2: Vec<f64> = idx.iter().map(|&i| ts[i]).collect();
        let f2: Vec<f64> = idx.iter().map(|&i| fs[i]).collect();
        trapezoid(&t2, &f2)
    };
    Ok(MDiagnostic {
        order,
        value: sup + full,
        sup_term: sup,
        integral: full,
        quadrature_error: (full - coarse).abs() / 3.0,
        t_final: traj.t_final(),
        completed,
    })
}

fn trapezoid(t: &[f64], f: &[f64]) -> f64 {
    t.windows(2)
        .zip(f.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum()
}

/// `t,k,re,im,l2,hs` with one row per sample and mode; `hs` is the first
/// recorded Sobolev order (empty when none was requested).
pub fn trajectory_csv<S: SpectralScalar>(traj: &Trajectory<S>) -> String {
    let mut out = String::from("t,k,re,im,l2,hs\n");
    for s in &traj.samples {
        let hs = s.hs.first().map(|v| format!("{v:.16e}")).unwrap_or_default();
        for (i, c) in s.coeffs.iter().enumerate() {
            let z = c.to_c64();
            let _ = writeln!(
                out,
                "{:.16e},{},{:.16e},{:.16e},{:.16e},{}",
                s.t,
                i + 1,
                z.re,
                z.im,
                s.l2,
                hs
            );
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormEntry {
    pub s: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinalNorms {
    pub l2: f64,
    pub hs: Vec<NormEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub status: TrajectoryStatus,
    pub t_final: f64,
    pub cap_time: Option<f64>,
    pub n: usize,
    pub samples: usize,
    pub norms: FinalNorms,
    pub warnings: Vec<String>,
}

pub fn trajectory_summary<S: SpectralScalar>(traj: &Trajectory<S>) -> TrajectorySummary {
    let last = traj.last();
    TrajectorySummary {
        status: traj.status,
        t_final: last.t,
        cap_time: traj.cap_time,
        n: last.coeffs.len(),
        samples: traj.samples.len(),
        norms: FinalNorms {
            l2: last.l2,
            hs: traj
                .hs_orders
                .iter()
                .zip(&last.hs)
                .map(|(s, v)| NormEntry { s: *s, value: *v })
                .collect(),
        },
        warnings: traj.warnings.clone(),
    }
}
