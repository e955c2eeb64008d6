//! Dense statevector engine for RY/CNOT circuits.
//!
//! Amplitude index `b` stores qubit `k` in bit `k`. Gates are applied in
//! place by walking amplitude pairs; no gate matrices are materialized.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{CircuitSpec, Gate, SimError};
use crate::ising::{EnergyTable, IsingHamiltonian};

/// States smaller than this are processed on the calling thread.
const PAR_MIN: usize = 1 << 14;
/// Fixed chunk for reductions so sums do not depend on the thread schedule.
const REDUCE_CHUNK: usize = 1 << 12;

/// Measurement outcomes keyed by basis index.
pub type Counts = BTreeMap<usize, u64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { num_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, SimError> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(SimError::DimensionMismatch {
                expected: len.next_power_of_two(),
                actual: len,
            });
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.chunked_sum(|a| a.norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn chunked_sum(&self, f: impl Fn(&Complex64) -> f64 + Sync) -> f64 {
        if self.amps.len() < PAR_MIN {
            return self.amps.iter().map(f).sum();
        }
        let partial: Vec<f64> = self
            .amps
            .par_chunks(REDUCE_CHUNK)
            .map(|c| c.iter().map(&f).sum::<f64>())
            .collect();
        partial.iter().sum()
    }

    /// Calls `f(lo_index, amp_lo, amp_hi)` for every pair differing only in
    /// bit `q`, where `amp_lo` has that bit clear.
    fn for_each_pair<F>(&mut self, q: usize, f: F)
    where
        F: Fn(usize, &mut Complex64, &mut Complex64) + Sync,
    {
        let stride = 1usize << q;
        let block = 2 * stride;
        let body = |(bi, chunk): (usize, &mut [Complex64])| {
            let (lo, hi) = chunk.split_at_mut(stride);
            for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                f(bi * block + k, a, b);
            }
        };
        if self.amps.len() < PAR_MIN {
            self.amps.chunks_mut(block).enumerate().for_each(body);
        } else if stride >= PAR_MIN {
            for (bi, chunk) in self.amps.chunks_mut(block).enumerate() {
                let (lo, hi) = chunk.split_at_mut(stride);
                lo.par_iter_mut()
                    .zip(hi.par_iter_mut())
                    .enumerate()
                    .for_each(|(k, (a, b))| f(bi * block + k, a, b));
            }
        } else {
            self.amps.par_chunks_mut(block).enumerate().for_each(body);
        }
    }

    pub fn apply_ry(&mut self, qubit: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        self.for_each_pair(qubit, |_, a0, a1| {
            let (x, y) = (*a0, *a1);
            *a0 = x * c - y * s;
            *a1 = x * s + y * c;
        });
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let mask = 1usize << control;
        self.for_each_pair(target, |idx, a0, a1| {
            if idx & mask != 0 {
                std::mem::swap(a0, a1);
            }
        });
    }

    pub fn apply(&mut self, gate: &Gate) {
        match *gate {
            Gate::Ry { qubit, theta } => self.apply_ry(qubit, theta),
            Gate::Cx { control, target } => self.apply_cx(control, target),
        }
    }

    /// `sum_b |amp_b|^2 * E_b`.
    pub fn expectation(&self, table: &EnergyTable) -> Result<f64, SimError> {
        if table.len() != self.amps.len() {
            return Err(SimError::DimensionMismatch {
                expected: self.amps.len(),
                actual: table.len(),
            });
        }
        let e = table.as_slice();
        if self.amps.len() < PAR_MIN {
            return Ok(self
                .amps
                .iter()
                .zip(e)
                .map(|(a, &v)| a.norm_sqr() * v)
                .sum());
        }
        let partial: Vec<f64> = self
            .amps
            .par_chunks(REDUCE_CHUNK)
            .zip(e.par_chunks(REDUCE_CHUNK))
            .map(|(a, v)| a.iter().zip(v).map(|(a, &v)| a.norm_sqr() * v).sum::<f64>())
            .collect();
        Ok(partial.iter().sum())
    }

    /// Draws `shots` basis indices from `|amp|^2` with a seeded generator.
    pub fn sample(&self, shots: u64, seed: u64) -> Counts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = self.norm_sqr();
        let mut draws: Vec<f64> = (0..shots).map(|_| rng.gen::<f64>() * total).collect();
        draws.sort_by(f64::total_cmp);

        let mut counts = Counts::new();
        let mut cumulative = 0.0;
        let mut next = 0usize;
        let last_nonzero = self
            .amps
            .iter()
            .rposition(|a| a.norm_sqr() > 0.0)
            .unwrap_or(0);
        for (idx, a) in self.amps.iter().enumerate() {
            if next == draws.len() {
                break;
            }
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            cumulative += p;
            let start = next;
            // the last populated index absorbs any rounding shortfall
            while next < draws.len() && (draws[next] < cumulative || idx == last_nonzero) {
                next += 1;
            }
            if next > start {
                counts.insert(idx, (next - start) as u64);
            }
        }
        counts
    }
}

/// Prepares `spec` with `params` applied to `|0...0>`.
pub fn simulate(spec: &CircuitSpec, params: &[f64]) -> Result<Statevector, SimError> {
    let gates = spec.gates(params)?;
    let mut state = Statevector::zero(spec.num_qubits);
    for g in &gates {
        state.apply(g);
    }
    Ok(state)
}

/// Exact `<psi|H|psi>` for a diagonal Hamiltonian.
pub fn expectation_exact(state: &Statevector, hmt: &IsingHamiltonian) -> Result<f64, SimError> {
    if hmt.num_qubits != state.num_qubits {
        return Err(SimError::DimensionMismatch {
            expected: state.num_qubits,
            actual: hmt.num_qubits,
        });
    }
    state.expectation(&hmt.energy_table())
}

/// Mean and sample standard deviation of the energy over measured shots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledEstimate {
    pub mean: f64,
    pub std: f64,
    pub shots: u64,
}

/// Energy statistics of a set of counts. `energy` maps a basis index to its
/// eigenvalue.
pub fn estimate_from_counts(counts: &Counts, energy: impl Fn(usize) -> f64) -> SampledEstimate {
    let shots: u64 = counts.values().sum();
    let values: Vec<(f64, f64)> = counts
        .iter()
        .map(|(&i, &c)| (energy(i), c as f64))
        .collect();
    let n = shots as f64;
    let mean = values.iter().map(|(e, c)| e * c).sum::<f64>() / n;
    let var = if shots > 1 {
        values
            .iter()
            .map(|(e, c)| c * (e - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    SampledEstimate {
        mean,
        std: var.sqrt(),
        shots,
    }
}

/// Simulates, samples `shots` times and averages the sampled energies.
pub fn estimate_sampled(
    spec: &CircuitSpec,
    params: &[f64],
    hmt: &IsingHamiltonian,
    shots: u64,
    seed: u64,
) -> Result<SampledEstimate, SimError> {
    if hmt.num_qubits != spec.num_qubits {
        return Err(SimError::DimensionMismatch {
            expected: spec.num_qubits,
            actual: hmt.num_qubits,
        });
    }
    if shots == 0 {
        return Err(SimError::NoShots);
    }
    let state = simulate(spec, params)?;
    let counts = state.sample(shots, seed);
    Ok(estimate_from_counts(&counts, |i| hmt.energy_index(i)))
}

pub fn expectation_sampled(
    spec: &CircuitSpec,
    params: &[f64],
    hmt: &IsingHamiltonian,
    shots: u64,
    seed: u64,
) -> Result<f64, SimError> {
    estimate_sampled(spec, params, hmt, shots, seed).map(|e| e.mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Entanglement;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    // 4x4 real matrices acting on [|00>, |q0=1>, |q1=1>, |11>]
    fn matvec(m: [[f64; 4]; 4], v: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i] += m[i][j] * v[j];
            }
        }
        out
    }

    #[test]
    fn zero_params_stay_in_ground_state() {
        for e in Entanglement::ALL {
            let spec = CircuitSpec::new(5, 2, e);
            let s = simulate(&spec, &vec![0.0; spec.num_params()]).unwrap();
            assert_eq!(s.amplitudes()[0], c(1.0));
            assert!(s.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
        }
    }

    #[test]
    fn ry_pi_flips() {
        let mut s = Statevector::zero(1);
        s.apply_ry(0, PI);
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bell_state_matches_hand_multiplication() {
        let spec = CircuitSpec::new(2, 1, Entanglement::Linear);
        let s = simulate(&spec, &[PI / 2.0, 0.0, 0.0, 0.0]).unwrap();

        let (h, k) = ((PI / 4.0).cos(), (PI / 4.0).sin());
        // RY(pi/2) on qubit 0 (index bit 0)
        let ry0 = [
            [h, -k, 0.0, 0.0],
            [k, h, 0.0, 0.0],
            [0.0, 0.0, h, -k],
            [0.0, 0.0, k, h],
        ];
        // CX control 0, target 1: swaps |01> (index 1) and |11> (index 3)
        let cx = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ];
        let expected = matvec(cx, matvec(ry0, [1.0, 0.0, 0.0, 0.0]));
        assert!((expected[0] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((expected[3] - FRAC_1_SQRT_2).abs() < 1e-15);
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert!((a.re - e).abs() < 1e-12 && a.im.abs() < 1e-12);
        }
    }

    #[test]
    fn cx_only_acts_when_control_set() {
        let mut s = Statevector::from_amplitudes(vec![c(0.0), c(0.0), c(1.0), c(0.0)]).unwrap();
        s.apply_cx(0, 1);
        assert_eq!(s.amplitudes()[2], c(1.0));
        let mut s = Statevector::from_amplitudes(vec![c(0.0), c(1.0), c(0.0), c(0.0)]).unwrap();
        s.apply_cx(0, 1);
        assert_eq!(s.amplitudes()[3], c(1.0));
    }

    #[test]
    fn param_count_mismatch() {
        let spec = CircuitSpec::new(3, 1, Entanglement::Full);
        assert!(matches!(
            simulate(&spec, &[0.0; 5]),
            Err(SimError::ParamCountMismatch {
                expected: 6,
                actual: 5
            })
        ));
    }

    #[test]
    fn uniform_single_qubit_expectation() {
        let mut s = Statevector::zero(1);
        s.apply_ry(0, PI / 2.0);
        let mut h = IsingHamiltonian::zero(1);
        h.h.insert(0, 1.0);
        assert!(expectation_exact(&s, &h).unwrap().abs() < 1e-15);
        assert!(matches!(
            expectation_exact(&s, &IsingHamiltonian::zero(2)),
            Err(SimError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn point_mass_sampling() {
        let spec = CircuitSpec::new(3, 1, Entanglement::Linear);
        let mut p = vec![0.0; 6];
        p[1] = PI;
        let s = simulate(&spec, &p).unwrap();
        let counts = s.sample(1000, 7);
        assert_eq!(counts.len(), 1);
        assert_eq!(counts.values().sum::<u64>(), 1000);

        let mut h = IsingHamiltonian::zero(3);
        h.h.insert(1, 0.7);
        h.j.insert((0, 2), -0.3);
        h.offset = 2.0;
        let exact = expectation_exact(&s, &h).unwrap();
        let sampled = expectation_sampled(&spec, &p, &h, 100, 3).unwrap();
        assert!((exact - sampled).abs() < 1e-12);
    }

    #[test]
    fn bell_sampling_is_binomial_and_reproducible() {
        let spec = CircuitSpec::new(2, 1, Entanglement::Linear);
        let s = simulate(&spec, &[PI / 2.0, 0.0, 0.0, 0.0]).unwrap();
        let counts = s.sample(4000, 11);
        assert_eq!(counts.keys().copied().collect::<Vec<_>>(), vec![0, 3]);
        let sigma = (4000.0f64 * 0.25).sqrt();
        for &n in counts.values() {
            assert!((n as f64 - 2000.0).abs() <= 5.0 * sigma);
        }
        assert_eq!(counts, s.sample(4000, 11));
        assert_ne!(counts, s.sample(4000, 12));
    }

    #[test]
    fn zero_shots_rejected() {
        let spec = CircuitSpec::new(1, 0, Entanglement::Linear);
        let h = IsingHamiltonian::zero(1);
        assert_eq!(
            expectation_sampled(&spec, &[0.0], &h, 0, 1).unwrap_err(),
            SimError::NoShots
        );
    }
}
