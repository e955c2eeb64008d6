//! Nelder–Mead simplex search used as the local, one-evaluation-per-step
//! baseline.

use serde::{Deserialize, Serialize};

use super::{check_bounds, GenerationStats, ObjectiveError, OptError, OptResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalConfig {
    pub max_evals: usize,
    /// Stop when every vertex is within `xatol` of the best one...
    pub xatol: f64,
    /// ...and every vertex value within `fatol` of the best value.
    pub fatol: f64,
    /// Edge length of the starting simplex.
    pub initial_step: f64,
    /// Dimension-dependent coefficients (Gao & Han), better above ~5 dims.
    pub adaptive: bool,
    /// Evaluated points are clipped into these bounds when present.
    pub bounds: Option<Vec<(f64, f64)>>,
}

impl Default for LocalConfig {
    fn default() -> Self {
        Self {
            max_evals: 5000,
            xatol: 1e-4,
            fatol: 1e-4,
            initial_step: 0.5,
            adaptive: true,
            bounds: None,
        }
    }
}

/// Local derivative-free descent from `x0`.
pub fn local_minimize<F>(
    mut objective: F,
    x0: &[f64],
    cfg: &LocalConfig,
) -> Result<OptResult, OptError>
where
    F: FnMut(&[f64]) -> Result<f64, ObjectiveError>,
{
    let n = x0.len();
    if n == 0 {
        return Err(OptError::InvalidConfig(
            "dimension must be at least 1".into(),
        ));
    }
    if cfg.max_evals == 0 {
        return Err(OptError::InvalidConfig("max_evals must be positive".into()));
    }
    if let Some(b) = &cfg.bounds {
        check_bounds(b, n)?;
        if x0.iter().zip(b).any(|(v, &(lo, hi))| *v < lo || *v > hi) {
            return Err(OptError::InvalidBounds("x0 lies outside the bounds".into()));
        }
    }
    let clip = |x: &mut Vec<f64>| {
        if let Some(b) = &cfg.bounds {
            for (v, &(lo, hi)) in x.iter_mut().zip(b) {
                *v = v.clamp(lo, hi);
            }
        }
    };

    let nf = n as f64;
    let (rho, chi, psi, sigma) = if cfg.adaptive {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut trace = Vec::new();
    let mut eval = |x: &[f64], trace: &mut Vec<f64>| -> Result<f64, OptError> {
        let v = objective(x).map_err(OptError::Objective)?;
        trace.push(v);
        Ok(v)
    };

    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for k in 0..n {
        let mut v = x0.to_vec();
        v[k] += cfg.initial_step;
        clip(&mut v);
        if v[k] == x0[k] {
            v[k] -= cfg.initial_step;
            clip(&mut v);
        }
        simplex.push(v);
    }
    let mut fvals = Vec::with_capacity(n + 1);
    for v in &simplex {
        if trace.len() >= cfg.max_evals {
            break;
        }
        fvals.push(eval(v, &mut trace)?);
    }
    simplex.truncate(fvals.len());

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    let sort = |simplex: &mut Vec<Vec<f64>>, fvals: &mut Vec<f64>| {
        let mut order: Vec<usize> = (0..fvals.len()).collect();
        order.sort_by(|&a, &b| fvals[a].total_cmp(&fvals[b]));
        *simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        *fvals = order.iter().map(|&i| fvals[i]).collect();
    };
    sort(&mut simplex, &mut fvals);
    history.push(GenerationStats::of(&fvals));

    while simplex.len() == n + 1 && trace.len() < cfg.max_evals {
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        let f_spread = fvals[1..]
            .iter()
            .map(|f| (f - fvals[0]).abs())
            .fold(0.0f64, f64::max);
        if x_spread <= cfg.xatol && f_spread <= cfg.fatol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / nf)
            .collect();
        let towards = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let mut xr = towards(rho);
        clip(&mut xr);
        let fr = eval(&xr, &mut trace)?;
        let mut shrink = false;
        if fr < fvals[0] {
            let mut xe = towards(rho * chi);
            clip(&mut xe);
            if trace.len() < cfg.max_evals {
                let fe = eval(&xe, &mut trace)?;
                if fe < fr {
                    simplex[n] = xe;
                    fvals[n] = fe;
                } else {
                    simplex[n] = xr;
                    fvals[n] = fr;
                }
            } else {
                simplex[n] = xr;
                fvals[n] = fr;
            }
        } else if fr < fvals[n - 1] {
            simplex[n] = xr;
            fvals[n] = fr;
        } else if trace.len() < cfg.max_evals {
            if fr < fvals[n] {
                let mut xc = towards(psi * rho);
                clip(&mut xc);
                let fc = eval(&xc, &mut trace)?;
                if fc <= fr {
                    simplex[n] = xc;
                    fvals[n] = fc;
                } else {
                    shrink = true;
                }
            } else {
                let mut xcc = towards(-psi);
                clip(&mut xcc);
                let fcc = eval(&xcc, &mut trace)?;
                if fcc < fvals[n] {
                    simplex[n] = xcc;
                    fvals[n] = fcc;
                } else {
                    shrink = true;
                }
            }
        }
        if shrink {
            for k in 1..=n {
                if trace.len() >= cfg.max_evals {
                    break;
                }
                let mut v: Vec<f64> = simplex[0]
                    .iter()
                    .zip(&simplex[k])
                    .map(|(b, x)| b + sigma * (x - b))
                    .collect();
                clip(&mut v);
                fvals[k] = eval(&v, &mut trace)?;
                simplex[k] = v;
            }
        }
        sort(&mut simplex, &mut fvals);
        iterations += 1;
        history.push(GenerationStats::of(&fvals));
    }

    Ok(OptResult {
        best_params: simplex[0].clone(),
        best_value: fvals[0],
        generations: iterations,
        evaluations: trace.len(),
        history,
        trace,
        converged,
    })
}
