use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phasespace::{fft::half_shift, PhaseSpaceFunction, SampleGrid};

type SymbolFn = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub x: u32,
    pub p: u32,
    pub c: f64,
    #[serde(default)]
    pub ci: f64,
}

/// amplitude · exp(−(z−c)ᵀM(z−c))
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianBump {
    pub amplitude: f64,
    pub center: [f64; 2],
    pub matrix: [[f64; 2]; 2],
}

impl GaussianBump {
    pub fn isotropic(amplitude: f64, center: [f64; 2], width: f64) -> Self {
        let a = 1.0 / (width * width);
        Self { amplitude, center, matrix: [[a, 0.0], [0.0, a]] }
    }

    pub fn eval(&self, x: f64, p: f64) -> f64 {
        let (u, v) = (x - self.center[0], p - self.center[1]);
        let m = &self.matrix;
        let q = m[0][0] * u * u + (m[0][1] + m[1][0]) * u * v + m[1][1] * v * v;
        self.amplitude * (-q).exp()
    }
}

/// A phase-space symbol: closed forms evaluable anywhere, or grid samples.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Symbol {
    Polynomial { terms: Vec<Monomial> },
    Gaussian { bumps: Vec<GaussianBump> },
    /// amplitude · sin(kx·x) · sin(kp·p)
    SinProduct { amplitude: f64, kx: f64, kp: f64 },
    Sum { parts: Vec<Symbol> },
    #[serde(skip)]
    Sampled(SymbolSamples),
    #[serde(skip)]
    Func(SymbolFn),
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Polynomial { terms } => f.debug_struct("Polynomial").field("terms", terms).finish(),
            Symbol::Gaussian { bumps } => f.debug_struct("Gaussian").field("bumps", bumps).finish(),
            Symbol::SinProduct { amplitude, kx, kp } => f
                .debug_struct("SinProduct")
                .field("amplitude", amplitude)
                .field("kx", kx)
                .field("kp", kp)
                .finish(),
            Symbol::Sum { parts } => f.debug_struct("Sum").field("parts", parts).finish(),
            Symbol::Sampled(s) => write!(f, "Sampled({}x{})", s.on_grid.nx, s.on_grid.np),
            Symbol::Func(_) => write!(f, "Func"),
        }
    }
}

impl Symbol {
    pub fn constant(c: f64) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(x: u32, p: u32, c: f64) -> Self {
        Symbol::Polynomial { terms: vec![Monomial { x, p, c, ci: 0.0 }] }
    }

    pub fn polynomial(terms: &[(u32, u32, f64)]) -> Self {
        Symbol::Polynomial { terms: terms.iter().map(|&(x, p, c)| Monomial { x, p, c, ci: 0.0 }).collect() }
    }

    /// ½(x² + p²)
    pub fn harmonic_oscillator() -> Self {
        Self::polynomial(&[(2, 0, 0.5), (0, 2, 0.5)])
    }

    pub fn gaussian(bumps: Vec<GaussianBump>) -> Self {
        Symbol::Gaussian { bumps }
    }

    pub fn from_fn(f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Symbol::Func(Arc::new(f))
    }

    pub fn from_real_fn(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Symbol::Func(Arc::new(move |x, p| Complex64::new(f(x, p), 0.0)))
    }

    pub fn sampled(f: PhaseSpaceFunction) -> Self {
        Symbol::Sampled(SymbolSamples::from_grid_samples(f))
    }

    pub fn is_closed_form(&self) -> bool {
        match self {
            Symbol::Sampled(_) => false,
            Symbol::Sum { parts } => parts.iter().all(Symbol::is_closed_form),
            _ => true,
        }
    }

    /// Value at an arbitrary point; sampled symbols have no off-grid values.
    pub fn eval(&self, x: f64, p: f64) -> Result<Complex64> {
        Ok(match self {
            Symbol::Polynomial { terms } => terms
                .iter()
                .map(|t| Complex64::new(t.c, t.ci) * x.powi(t.x as i32) * p.powi(t.p as i32))
                .sum(),
            Symbol::Gaussian { bumps } => Complex64::new(bumps.iter().map(|b| b.eval(x, p)).sum(), 0.0),
            Symbol::SinProduct { amplitude, kx, kp } => Complex64::new(amplitude * (kx * x).sin() * (kp * p).sin(), 0.0),
            Symbol::Sum { parts } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for part in parts {
                    acc += part.eval(x, p)?;
                }
                acc
            }
            Symbol::Func(f) => f(x, p),
            Symbol::Sampled(_) => {
                return Err(Error::InvalidInput("sampled symbols can only be read on their grid".into()))
            }
        })
    }

    /// a ∘ S for a linear map S = [[s00, s01], [s10, s11]] acting on (x, p).
    pub fn compose_linear(&self, s: [[f64; 2]; 2]) -> Result<Self> {
        if !self.is_closed_form() {
            return Err(Error::InvalidInput("only closed-form symbols can be composed".into()));
        }
        let inner = self.clone();
        Ok(Symbol::from_fn(move |x, p| {
            let (u, v) = (s[0][0] * x + s[0][1] * p, s[1][0] * x + s[1][1] * p);
            inner.eval(u, v).expect("closed form")
        }))
    }

    pub fn sample_on(&self, grid: &SampleGrid) -> Result<PhaseSpaceFunction> {
        match self {
            Symbol::Sampled(s) => Ok(s.on_grid.clone()),
            _ => {
                let mut f = PhaseSpaceFunction::zeros(grid);
                for i in 0..f.nx {
                    for k in 0..f.np {
                        let v = self.eval(f.x(i), f.p(k))?;
                        f.set(i, k, v);
                    }
                }
                Ok(f)
            }
        }
    }

    /// Samples a(x̄_t, p_k) on the doubled midpoint grid x̄_t = x₀ + t·dx/2, t = 0..2N.
    /// The first momentum sample holds the average of the values at ∓p_max.
    pub(crate) fn midpoint_rows(&self, grid: &SampleGrid) -> Result<Vec<Vec<Complex64>>> {
        let n = grid.n;
        match self {
            Symbol::Sampled(s) => {
                if s.on_grid.nx != n || s.on_grid.np != n {
                    return Err(Error::InvalidInput("sampled symbol lives on a different grid".into()));
                }
                Ok((0..2 * n)
                    .map(|t| {
                        let src = if t % 2 == 0 { &s.on_grid } else { &s.half };
                        src.row(t / 2).to_vec()
                    })
                    .collect())
            }
            _ => {
                let pmax = grid.p_max();
                let mut rows = Vec::with_capacity(2 * n);
                for t in 0..2 * n {
                    let xb = grid.x0 + t as f64 * grid.dx / 2.0;
                    let mut row = Vec::with_capacity(n);
                    row.push((self.eval(xb, -pmax)? + self.eval(xb, pmax)?) * 0.5);
                    for k in 1..n {
                        row.push(self.eval(xb, grid.p(k))?);
                    }
                    rows.push(row);
                }
                Ok(rows)
            }
        }
    }
}

/// Grid samples of a symbol at (x_i, p_k) and at the shifted points (x_i + dx/2, p_k).
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolSamples {
    pub on_grid: PhaseSpaceFunction,
    pub half: PhaseSpaceFunction,
}

impl SymbolSamples {
    pub fn new(on_grid: PhaseSpaceFunction, half: PhaseSpaceFunction) -> Result<Self> {
        if !on_grid.same_shape(&half) {
            return Err(Error::InvalidInput("sample arrays differ in shape".into()));
        }
        Ok(Self { on_grid, half })
    }

    /// Fills the shifted samples by band-limited interpolation along x.
    pub fn from_grid_samples(on_grid: PhaseSpaceFunction) -> Self {
        let (nx, np) = (on_grid.nx, on_grid.np);
        let mut half = on_grid.clone();
        for k in 0..np {
            let col: Vec<Complex64> = (0..nx).map(|i| on_grid.get(i, k)).collect();
            for (i, v) in half_shift(&col).into_iter().enumerate() {
                half.set(i, k, v);
            }
        }
        Self { on_grid, half }
    }
}

/// Plateau window ½(1 + erf((c − u)/w)) · ½(1 + erf((c + u)/w)).
pub fn plateau(u: f64, c: f64, w: f64) -> f64 {
    0.25 * (1.0 + libm::erf((c - u) / w)) * (1.0 + libm::erf((c + u) / w))
}

