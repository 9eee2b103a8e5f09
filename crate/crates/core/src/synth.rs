//! Ground-truth data: polynomial/Laurent right-hand sides, fixed-step RK4, noise.

use crate::basis::{eval_monomial, MultiIndex};
use crate::error::{Error, Result};
use crate::jetspace::Trajectory;
use crate::rng::{derive_seed, gaussian, seeded};
use crate::scalar::Scalar;

/// `f(t, x) = Σ c · t^a x^b`.
#[derive(Clone, Debug, PartialEq)]
pub struct RhsSpec<T> {
    pub terms: Vec<(T, MultiIndex)>,
    pub name: Option<String>,
}

impl<T: Scalar> RhsSpec<T> {
    pub fn new(terms: Vec<(T, MultiIndex)>, name: Option<String>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Invalid("right-hand side needs at least one term".into()));
        }
        if terms.iter().any(|(c, _)| !c.is_finite()) {
            return Err(Error::NonFinite("right-hand side coefficients"));
        }
        Ok(Self { terms, name })
    }

    fn named(name: &str, terms: &[(f64, i32, i32)]) -> Self {
        Self {
            terms: terms.iter().map(|&(c, a, b)| (T::lit(c), MultiIndex::new(a, b))).collect(),
            name: Some(name.to_owned()),
        }
    }

    /// `2x/t − t²x²`.
    pub fn riccati() -> Self {
        Self::named("riccati", &[(2.0, -1, 1), (-1.0, 2, 2)])
    }

    pub fn linear_x() -> Self {
        Self::named("linear_x", &[(1.0, 0, 1)])
    }

    pub fn linear_t() -> Self {
        Self::named("linear_t", &[(1.0, 1, 0)])
    }

    pub fn constant() -> Self {
        Self::named("constant", &[(1.0, 0, 0)])
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "riccati" => Some(Self::riccati()),
            "linear_x" => Some(Self::linear_x()),
            "linear_t" => Some(Self::linear_t()),
            "constant" => Some(Self::constant()),
            _ => None,
        }
    }

    fn has_t_pole(&self) -> bool {
        self.terms.iter().any(|(_, m)| m.a < 0)
    }
}

pub fn eval_rhs<T: Scalar>(rhs: &RhsSpec<T>, t: T, x: T) -> Result<T> {
    let mut acc = T::zero();
    for &(c, idx) in &rhs.terms {
        acc += c * eval_monomial(idx, t, x)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug)]
pub struct Integration<T> {
    pub trajectory: Trajectory<T>,
    /// The state left the finite range (or hit an `x` pole) before `t1`.
    pub truncated: bool,
}

/// Classical fixed-step RK4 from `(t0, x0)` to `t1` in `steps` steps.
pub fn integrate_rk4<T: Scalar>(rhs: &RhsSpec<T>, t0: T, x0: T, t1: T, steps: usize) -> Result<Integration<T>> {
    if steps < 2 {
        return Err(Error::Invalid("steps must be at least 2".into()));
    }
    if !(t0.is_finite() && t1.is_finite() && x0.is_finite()) || t1 <= t0 {
        return Err(Error::Invalid("need finite t0 < t1 and finite x0".into()));
    }
    if rhs.has_t_pole() && t0 * t1 <= T::zero() {
        return Err(Error::Invalid(format!(
            "window [{t0}, {t1}] crosses the pole at t = 0 of a negative power of t"
        )));
    }
    let h = (t1 - t0) / T::from_usize_lossy(steps);
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let two = T::lit(2.0);
    let mut times = vec![t0];
    let mut states = vec![x0];
    let mut x = x0;
    // compensated accumulation of the increments
    let mut carry = T::zero();
    let mut truncated = false;
    for i in 0..steps {
        let t = t0 + T::from_usize_lossy(i) * h;
        let step = (|| -> Result<T> {
            let k1 = eval_rhs(rhs, t, x)?;
            let k2 = eval_rhs(rhs, t + half * h, x + half * h * k1)?;
            let k3 = eval_rhs(rhs, t + half * h, x + half * h * k2)?;
            let k4 = eval_rhs(rhs, t + h, x + h * k3)?;
            Ok(h * sixth * (k1 + two * k2 + two * k3 + k4))
        })();
        match step {
            Ok(inc) if (x + inc).is_finite() => {
                let y = inc - carry;
                let next = x + y;
                carry = (next - x) - y;
                x = next;
                times.push(if i + 1 == steps { t1 } else { t0 + T::from_usize_lossy(i + 1) * h });
                states.push(x);
            }
            _ => {
                truncated = true;
                break;
            }
        }
    }
    let id = rhs.name.clone().unwrap_or_else(|| "0".into());
    let trajectory = Trajectory::new(id, times, states)?;
    Ok(Integration { trajectory, truncated })
}

/// Integrates from each initial value and keeps every `substeps`-th node,
/// giving `points` samples per curve. Curve ids are `"0"`, `"1"`, ...
pub fn sample_trajectories<T: Scalar>(
    rhs: &RhsSpec<T>,
    t0: T,
    t1: T,
    initial: &[T],
    points: usize,
    substeps: usize,
) -> Result<Vec<(Trajectory<T>, bool)>> {
    if points < 3 || substeps < 1 {
        return Err(Error::Invalid("need points ≥ 3 and substeps ≥ 1".into()));
    }
    initial
        .iter()
        .enumerate()
        .map(|(k, &x0)| {
            let run = integrate_rk4(rhs, t0, x0, t1, (points - 1) * substeps)?;
            let tr = run.trajectory;
            let keep: Vec<usize> = (0..tr.len()).step_by(substeps).collect();
            let out = Trajectory::new(
                k.to_string(),
                keep.iter().map(|&i| tr.times[i]).collect(),
                keep.iter().map(|&i| tr.states[i]).collect(),
            )?;
            Ok((out, run.truncated))
        })
        .collect()
}

/// Adds i.i.d. Gaussian noise with standard deviation `sigma · RMS(x)` to the states.
pub fn add_noise<T: Scalar>(traj: &Trajectory<T>, sigma: T, seed: u64) -> Trajectory<T> {
    if sigma == T::zero() {
        return traj.clone();
    }
    let n = T::from_usize_lossy(traj.len());
    let rms = (traj.states.iter().map(|&v| v * v).sum::<T>() / n).sqrt();
    let std = sigma * rms;
    let mut rng = seeded(seed);
    let states = traj.states.iter().map(|&v| v + std * gaussian::<T>(&mut rng)).collect();
    Trajectory { id: traj.id.clone(), times: traj.times.clone(), states }
}

/// Noise for curve `index` under a run seed.
pub fn add_noise_indexed<T: Scalar>(traj: &Trajectory<T>, sigma: T, seed: u64, index: usize) -> Trajectory<T> {
    add_noise(traj, sigma, derive_seed(seed, index as u64))
}
