//! Integrands over `[0,1)^s` and the built-in test suite.

use alloc::boxed::Box;
use core::f64::consts::E;

/// A deterministic function on `[0,1)^s` with optional known properties.
pub trait Integrand: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> f64;

    fn name(&self) -> &str {
        "custom"
    }

    /// The exact integral, when known in closed form.
    fn exact_mean(&self) -> Option<f64> {
        None
    }

    /// A bound on `sup |grad f|_2`.
    fn lipschitz(&self) -> Option<f64> {
        None
    }

    /// `sup f - inf f`.
    fn range_width(&self) -> Option<f64> {
        None
    }
}

impl<T: Integrand + ?Sized> Integrand for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn exact_mean(&self) -> Option<f64> {
        (**self).exact_mean()
    }
    fn lipschitz(&self) -> Option<f64> {
        (**self).lipschitz()
    }
    fn range_width(&self) -> Option<f64> {
        (**self).range_width()
    }
}

impl<T: Integrand + ?Sized> Integrand for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn exact_mean(&self) -> Option<f64> {
        (**self).exact_mean()
    }
    fn lipschitz(&self) -> Option<f64> {
        (**self).lipschitz()
    }
    fn range_width(&self) -> Option<f64> {
        (**self).range_width()
    }
}

/// Wraps a closure.
pub struct FnIntegrand<F> {
    s: usize,
    f: F,
    mean: Option<f64>,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> FnIntegrand<F> {
    pub fn new(s: usize, f: F) -> Self {
        Self { s, f, mean: None }
    }

    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = Some(mean);
        self
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Integrand for FnIntegrand<F> {
    fn dim(&self) -> usize {
        self.s
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn exact_mean(&self) -> Option<f64> {
        self.mean
    }
}

/// `f(x) = c`.
#[derive(Clone, Copy, Debug)]
pub struct Constant {
    s: usize,
    value: f64,
}

impl Constant {
    pub fn new(s: usize, value: f64) -> Self {
        Self { s, value }
    }
}

impl Integrand for Constant {
    fn dim(&self) -> usize {
        self.s
    }
    fn eval(&self, _x: &[f64]) -> f64 {
        self.value
    }
    fn name(&self) -> &str {
        "constant"
    }
    fn exact_mean(&self) -> Option<f64> {
        Some(self.value)
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(0.0)
    }
    fn range_width(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `f(x) = x_1`.
#[derive(Clone, Copy, Debug)]
pub struct Linear {
    s: usize,
}

impl Linear {
    pub fn new(s: usize) -> Self {
        Self { s }
    }
}

impl Integrand for Linear {
    fn dim(&self) -> usize {
        self.s
    }
    fn eval(&self, x: &[f64]) -> f64 {
        x[0]
    }
    fn name(&self) -> &str {
        "linear"
    }
    fn exact_mean(&self) -> Option<f64> {
        Some(0.5)
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(1.0)
    }
    fn range_width(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `f(x) = exp(x_1 + ... + x_s) - (e - 1)^s`, centred so the integral is 0.
#[derive(Clone, Copy, Debug)]
pub struct ExpSum {
    s: usize,
    offset: f64,
}

impl ExpSum {
    pub fn new(s: usize) -> Self {
        Self {
            s,
            offset: libm::pow(E - 1.0, s as f64),
        }
    }
}

impl Integrand for ExpSum {
    fn dim(&self) -> usize {
        self.s
    }
    fn eval(&self, x: &[f64]) -> f64 {
        libm::exp(x.iter().sum::<f64>()) - self.offset
    }
    fn name(&self) -> &str {
        "exp"
    }
    fn exact_mean(&self) -> Option<f64> {
        Some(0.0)
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(libm::exp(self.s as f64) * libm::sqrt(self.s as f64))
    }
    fn range_width(&self) -> Option<f64> {
        Some(libm::exp(self.s as f64) - 1.0)
    }
}

/// `f(x) = sum_j sin(x_j)`.
#[derive(Clone, Copy, Debug)]
pub struct AdditiveSin {
    s: usize,
}

impl AdditiveSin {
    pub fn new(s: usize) -> Self {
        Self { s }
    }
}

impl Integrand for AdditiveSin {
    fn dim(&self) -> usize {
        self.s
    }
    fn eval(&self, x: &[f64]) -> f64 {
        x.iter().map(|&v| libm::sin(v)).sum()
    }
    fn name(&self) -> &str {
        "sin"
    }
    fn exact_mean(&self) -> Option<f64> {
        Some(self.s as f64 * (1.0 - libm::cos(1.0)))
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(libm::sqrt(self.s as f64))
    }
    fn range_width(&self) -> Option<f64> {
        Some(self.s as f64 * libm::sin(1.0))
    }
}

/// `f(x) = exp(x_1 + x_2) + eps * prod_j 2 x_j`: two important inputs and a
/// small full-dimensional interaction.
#[derive(Clone, Copy, Debug)]
pub struct LowDimensional {
    s: usize,
    eps: f64,
}

impl LowDimensional {
    pub const DEFAULT_EPS: f64 = 1e-3;

    pub fn new(s: usize, eps: f64) -> Self {
        assert!(s >= 2, "low-dimensional integrand needs s >= 2");
        Self { s, eps }
    }
}

impl Integrand for LowDimensional {
    fn dim(&self) -> usize {
        self.s
    }
    fn eval(&self, x: &[f64]) -> f64 {
        libm::exp(x[0] + x[1]) + self.eps * x.iter().map(|&v| 2.0 * v).product::<f64>()
    }
    fn name(&self) -> &str {
        "lowdim"
    }
    fn exact_mean(&self) -> Option<f64> {
        Some((E - 1.0) * (E - 1.0) + self.eps)
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &["constant", "linear", "exp", "sin", "lowdim"];

/// Looks up a built-in integrand by name.
pub fn builtin(name: &str, s: usize) -> Option<Box<dyn Integrand>> {
    if s == 0 {
        return None;
    }
    Some(match name {
        "constant" => Box::new(Constant::new(s, 1.0)),
        "linear" => Box::new(Linear::new(s)),
        "exp" => Box::new(ExpSum::new(s)),
        "sin" => Box::new(AdditiveSin::new(s)),
        "lowdim" if s >= 2 => Box::new(LowDimensional::new(s, LowDimensional::DEFAULT_EPS)),
        _ => return None,
    })
}
