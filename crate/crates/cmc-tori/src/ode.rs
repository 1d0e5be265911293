//! Dormand–Prince 5(4) with dense output and event location.

use crate::error::{Error, Result};

/// Step size control.
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-12,
            atol: 1e-13,
            h0: 1e-4,
            h_max: 0.05,
            max_steps: 200_000,
        }
    }
}

/// One accepted step with its continuous extension.
#[derive(Clone, Copy, Debug)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 4],
}

impl<const N: usize> Step<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Dense output at `t ∈ [t0, t0 + h]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let [r2, r3, r4, r5] = &self.rcont;
        std::array::from_fn(|i| self.y0[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i]))))
    }

    /// Root of `g` on the step by bisection on the dense output, given that `g`
    /// changes sign between the step ends.
    pub fn locate<G: Fn(f64, &[f64; N]) -> f64>(&self, g: G) -> f64 {
        let (mut a, mut b) = (self.t0, self.t1());
        let mut ga = g(a, &self.y0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let gm = g(m, &self.eval(m));
            if gm == 0.0 {
                return m;
            }
            if (gm > 0.0) == (ga > 0.0) {
                a = m;
                ga = gm;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

/// Decision returned by the step observer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrates `y' = f(t, y)` forward from `(t0, y0)`.
///
/// `accept` can veto a step that passed the error test (the step is then
/// retried at half the size); `observe` is called with every accepted step
/// and stops the integration by returning [`Control::Stop`].
pub fn integrate<const N: usize, F, A2, O>(
    f: F,
    t0: f64,
    y0: [f64; N],
    opts: &OdeOptions,
    accept: A2,
    mut observe: O,
) -> Result<()>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    A2: Fn(&[f64; N]) -> bool,
    O: FnMut(&Step<N>) -> Result<Control>,
{
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.h0;
    let mut k1 = f(t, &y)?;
    let mut vetoes = 0usize;
    for _ in 0..opts.max_steps {
        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        let mut ok = true;
        for s in 1..7 {
            let ys: [f64; N] =
                std::array::from_fn(|i| y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>());
            match f(t + C[s] * h, &ys) {
                Ok(v) => k[s] = v,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            h *= 0.25;
            if h < 1e-14 {
                return Err(Error::Numerical(
                    "field evaluation failed at minimal step".into(),
                ));
            }
            continue;
        }
        let y1: [f64; N] =
            std::array::from_fn(|i| y[i] + h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>());
        let mut err = 0.0f64;
        for i in 0..N {
            let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let sc = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if err > 1.0 {
            h *= fac.min(1.0);
            if h < 1e-14 {
                return Err(Error::Numerical("step size underflow".into()));
            }
            continue;
        }
        if !accept(&y1) {
            vetoes += 1;
            if vetoes > 60 {
                return Err(Error::Numerical(
                    "step repeatedly rejected by the accuracy monitor".into(),
                ));
            }
            h *= 0.5;
            continue;
        }
        vetoes = 0;
        let r2: [f64; N] = std::array::from_fn(|i| y1[i] - y[i]);
        let r3: [f64; N] = std::array::from_fn(|i| h * k[0][i] - r2[i]);
        let r4: [f64; N] = std::array::from_fn(|i| r2[i] - h * k[6][i] - r3[i]);
        let r5: [f64; N] = std::array::from_fn(|i| h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>());
        let step = Step {
            t0: t,
            h,
            y0: y,
            y1,
            rcont: [r2, r3, r4, r5],
        };
        t += h;
        y = y1;
        k1 = k[6];
        if observe(&step)? == Control::Stop {
            return Ok(());
        }
        h = (h * fac).min(opts.h_max);
    }
    Err(Error::Numerical(format!(
        "no termination within {} steps",
        opts.max_steps
    )))
}
