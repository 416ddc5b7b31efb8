//! Test functions `F(k, v, t)` on `K × 𝔭 × [0, 1]` with a declared decay
//! class, which fixes how far a `𝔭`-grid has to reach.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use super::gaussian_truncation;

type Evaluator = dyn Fn(&[f64], &[f64], f64) -> Complex64 + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayClass {
    /// `F = 0` for `|v| ≥ radius`.
    CompactBump { radius: f64 },
    /// `|F(k, v, t)| ≤ constant · e^{−rate (|v| − offset)²}` for `|v| ≥ offset`.
    Gaussian {
        constant: f64,
        rate: f64,
        offset: f64,
    },
}

impl DecayClass {
    /// Radius beyond which the function is zero or negligible.
    pub fn truncation_radius(&self) -> f64 {
        match *self {
            DecayClass::CompactBump { radius } => radius,
            DecayClass::Gaussian { rate, offset, .. } => offset + gaussian_truncation(rate),
        }
    }

    /// `∞` for the gaussian class.
    pub fn support_radius(&self) -> f64 {
        match *self {
            DecayClass::CompactBump { radius } => radius,
            DecayClass::Gaussian { .. } => f64::INFINITY,
        }
    }
}

/// A trigonometric polynomial `Σ c_m e^{i⟨m, θ⟩}` on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct KModulation {
    terms: Vec<(Vec<i32>, Complex64)>,
}

impl KModulation {
    pub fn constant(rank: usize) -> Self {
        Self {
            terms: vec![(vec![0; rank], Complex64::new(1.0, 0.0))],
        }
    }

    pub fn new(terms: Vec<(Vec<i32>, Complex64)>) -> Self {
        Self { terms }
    }

    /// `1 + a cos(θ_j)` in the given factor.
    pub fn cosine(rank: usize, factor: usize, a: f64) -> Self {
        let mut plus = vec![0; rank];
        plus[factor] = 1;
        let minus: Vec<i32> = plus.iter().map(|m| -m).collect();
        Self {
            terms: vec![
                (vec![0; rank], Complex64::new(1.0, 0.0)),
                (plus, Complex64::new(0.5 * a, 0.0)),
                (minus, Complex64::new(0.5 * a, 0.0)),
            ],
        }
    }

    pub fn terms(&self) -> &[(Vec<i32>, Complex64)] {
        &self.terms
    }

    /// Largest `|m_j|` over all terms.
    pub fn degree(&self) -> i32 {
        self.terms
            .iter()
            .flat_map(|(m, _)| m.iter().map(|x| x.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, angles: &[f64]) -> Complex64 {
        let mut bases = [Complex64::new(1.0, 0.0); 8];
        for (b, &a) in bases.iter_mut().zip(angles) {
            *b = Complex64::from_polar(1.0, a);
        }
        self.terms
            .iter()
            .map(|(m, c)| {
                m.iter()
                    .zip(&bases)
                    .fold(*c, |acc, (&e, b)| if e == 0 { acc } else { acc * b.powi(e) })
            })
            .sum()
    }
}

/// The smooth bump `exp(1 − 1/(1 − s))` for `s = |v|²/R² < 1`, equal to 1 at 0.
pub fn bump_profile(r2_over_radius2: f64) -> f64 {
    if r2_over_radius2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r2_over_radius2)).exp()
    }
}

#[derive(Clone)]
pub struct SmoothTestFunction {
    evaluator: Arc<Evaluator>,
    pub decay: DecayClass,
    pub note: String,
}

impl fmt::Debug for SmoothTestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothTestFunction")
            .field("decay", &self.decay)
            .field("note", &self.note)
            .finish()
    }
}

impl SmoothTestFunction {
    pub fn new<F>(decay: DecayClass, note: impl Into<String>, evaluator: F) -> Self
    where
        F: Fn(&[f64], &[f64], f64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            evaluator: Arc::new(evaluator),
            decay,
            note: note.into(),
        }
    }

    pub fn zero() -> Self {
        Self::new(DecayClass::CompactBump { radius: 1.0 }, "zero", |_, _, _| {
            Complex64::new(0.0, 0.0)
        })
    }

    /// `m(k) · exp(1 − 1/(1 − |v|²/R²))`, independent of `t`.
    pub fn bump(radius: f64, modulation: KModulation) -> Self {
        let r2 = radius * radius;
        Self::new(
            DecayClass::CompactBump { radius },
            format!("bump R={radius}"),
            move |k, v, _| {
                let s: f64 = v.iter().map(|x| x * x).sum::<f64>() / r2;
                modulation.eval(k) * bump_profile(s)
            },
        )
    }

    /// `m(k) · e^{−rate |v − center|²}`, independent of `t`.
    pub fn gaussian(rate: f64, center: Vec<f64>, modulation: KModulation) -> Self {
        let bound: f64 = modulation.terms().iter().map(|(_, c)| c.norm()).sum();
        let offset = center.iter().map(|x| x * x).sum::<f64>().sqrt();
        Self::new(
            DecayClass::Gaussian {
                constant: bound,
                rate,
                offset,
            },
            format!("gaussian rate={rate} center={center:?}"),
            move |k, v, _| {
                let d2: f64 = v.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
                modulation.eval(k) * (-rate * d2).exp()
            },
        )
    }

    pub fn eval(&self, k: &[f64], v: &[f64], t: f64) -> Complex64 {
        (self.evaluator)(k, v, t)
    }

    pub fn truncation_radius(&self) -> f64 {
        self.decay.truncation_radius()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let inner = self.evaluator.clone();
        let decay = match self.decay {
            DecayClass::Gaussian {
                constant,
                rate,
                offset,
            } => DecayClass::Gaussian {
                constant: constant * factor.norm(),
                rate,
                offset,
            },
            d => d,
        };
        Self {
            evaluator: Arc::new(move |k, v, t| factor * inner(k, v, t)),
            decay,
            note: format!("{} × {factor}", self.note),
        }
    }

    /// Caches values by the exact bit patterns of the arguments. Worth it
    /// when the function is expensive and a quadrature revisits nodes.
    pub fn memoized(&self) -> Self {
        let inner = self.evaluator.clone();
        let memo = Memo::default();
        Self {
            evaluator: Arc::new(move |k, v, t| {
                let key = Memo::key(&[k, v, &[t]]);
                memo.get_or_insert(key, || inner(k, v, t))
            }),
            decay: self.decay,
            note: self.note.clone(),
        }
    }
}

/// Thread-safe cache of complex values keyed by `f64` bit patterns.
#[derive(Default)]
pub struct Memo {
    map: Mutex<HashMap<Vec<u64>, Complex64>>,
}

impl Memo {
    pub fn key(parts: &[&[f64]]) -> Vec<u64> {
        parts
            .iter()
            .flat_map(|p| p.iter().map(|x| x.to_bits()))
            .collect()
    }

    pub fn get_or_insert(&self, key: Vec<u64>, compute: impl FnOnce() -> Complex64) -> Complex64 {
        if let Some(v) = self.map.lock().expect("memo lock").get(&key) {
            return *v;
        }
        let value = compute();
        self.map.lock().expect("memo lock").insert(key, value);
        value
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("memo lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_vanishes_outside_support() {
        let f = SmoothTestFunction::bump(2.0, KModulation::constant(1));
        assert_eq!(f.eval(&[0.3], &[2.0, 0.0], 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(f.eval(&[0.3], &[1.5, 1.5], 0.0), Complex64::new(0.0, 0.0));
        assert!((f.eval(&[0.3], &[0.0, 0.0], 0.0).re - 1.0).abs() < 1e-15);
        assert_eq!(f.decay.support_radius(), 2.0);
    }

    #[test]
    fn gaussian_bound_holds() {
        let f = SmoothTestFunction::gaussian(1.5, vec![0.3, -0.4], KModulation::cosine(1, 0, 0.5));
        let DecayClass::Gaussian { constant, rate, offset } = f.decay else {
            panic!("expected gaussian class");
        };
        assert!((offset - 0.5).abs() < 1e-15);
        for i in 0..50 {
            let r = 0.5 + 0.1 * i as f64;
            let v = [r * 0.6, r * 0.8];
            let value = f.eval(&[1.0], &v, 0.0).norm();
            assert!(value <= constant * (-rate * (r - offset).powi(2)).exp() * (1.0 + 1e-12));
        }
        assert!(f.truncation_radius() > 6.0);
    }

    #[test]
    fn modulation_cosine() {
        let m = KModulation::cosine(2, 1, 0.5);
        let z = m.eval(&[0.7, 0.4]);
        assert!((z.re - (1.0 + 0.5 * 0.4f64.cos())).abs() < 1e-15);
        assert!(z.im.abs() < 1e-15);
        assert_eq!(m.degree(), 1);
    }

    #[test]
    fn memoized_agrees_and_caches() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        let calls = Arc::new(AtomicUsize::new(0));
        let c = calls.clone();
        let f = SmoothTestFunction::new(DecayClass::CompactBump { radius: 1.0 }, "count", move |k, v, _| {
            c.fetch_add(1, Ordering::SeqCst);
            Complex64::new(k[0] + v[0], v[1])
        })
        .memoized();
        let a = f.eval(&[0.1], &[0.2, 0.3], 0.0);
        let b = f.eval(&[0.1], &[0.2, 0.3], 0.0);
        assert_eq!(a, b);
        assert_eq!(calls.load(Ordering::SeqCst), 1);
        f.eval(&[0.1], &[0.2, 0.30000000000000004], 0.0);
        assert_eq!(calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn zero_function() {
        let f = SmoothTestFunction::zero();
        assert_eq!(f.eval(&[0.0], &[0.1, 0.1], 0.5), Complex64::new(0.0, 0.0));
    }
}
