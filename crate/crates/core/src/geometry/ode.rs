//! Dormand–Prince 5(4) with step-size control and 4th-order dense output.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct Integration<const N: usize, E> {
    /// Output parameters, uniform on `[0, span]`, truncated if stopped.
    pub s: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub stats: StepStats,
    pub stop: Option<Stop<E>>,
}

#[derive(Debug, Clone)]
pub enum StopReason<E> {
    /// The right-hand side kept failing as the step shrank.
    Failed(E),
    StepUnderflow,
    MaxSteps,
}

#[derive(Debug, Clone)]
pub struct Stop<E> {
    pub s_reached: f64,
    pub reason: StopReason<E>,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

fn rms<const N: usize>(v: impl Fn(usize) -> f64) -> f64 {
    ((0..N).map(|i| v(i).powi(2)).sum::<f64>() / N as f64).sqrt()
}

/// Integrates `y' = f(s, y)` from `s = 0` to `span` and reports the solution
/// at `n_out` equally spaced parameters (both ends included).
///
/// A failing right-hand side shrinks the step; once the step falls below
/// `1e-12 |span|` integration stops and the samples reached so far are
/// returned together with the error.
pub fn dopri5<const N: usize, E>(
    f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    y0: [f64; N],
    span: f64,
    n_out: usize,
    opts: &OdeOptions,
) -> Result<Integration<N, E>, E> {
    dopri5_guarded(f, |_: &[f64; N], _: &[f64; N]| Ok(()), y0, span, n_out, opts)
}

/// As [`dopri5`], with `guard(y_start, y_end)` vetting every step that
/// passes the error test. A rejected step is retried at a quarter of the
/// size, so integration stops where the guard first fails.
pub fn dopri5_guarded<const N: usize, E>(
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    mut guard: impl FnMut(&[f64; N], &[f64; N]) -> Result<(), E>,
    y0: [f64; N],
    span: f64,
    n_out: usize,
    opts: &OdeOptions,
) -> Result<Integration<N, E>, E> {
    let n_out = n_out.max(2);
    let grid: Vec<f64> = (0..n_out).map(|k| span * k as f64 / (n_out - 1) as f64).collect();
    let mut stats = StepStats::default();
    let mut out_s = vec![0.0];
    let mut out_y = vec![y0];
    let mut next = 1;

    let dir = if span < 0.0 { -1.0 } else { 1.0 };
    let length = span.abs();
    if length == 0.0 {
        return Ok(Integration {
            s: grid,
            y: vec![y0; n_out],
            stats,
            stop: None,
        });
    }
    let h_min = 1e-12 * length;

    let mut s = 0.0;
    let mut y = y0;
    let mut k1 = f(s, &y)?;
    stats.evaluations += 1;

    // initial step, Hairer–Norsett–Wanner heuristic
    let sc = |i: usize, y: &[f64; N]| opts.atol + opts.rtol * y[i].abs();
    let d0 = rms::<N>(|i| y[i] / sc(i, &y));
    let d1 = rms::<N>(|i| k1[i] / sc(i, &y));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * length } else { 0.01 * d0 / d1 };
    let mut h = h0.min(length);
    if let Ok(f1) = f(s + dir * h, &combo(&y, dir * h, &[(1.0, &k1)])) {
        stats.evaluations += 1;
        let d2 = rms::<N>(|i| (f1[i] - k1[i]) / sc(i, &y)) / h;
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 { (h * 1e-3).max(1e-6 * length) } else { (0.01 / dm).powf(0.2) };
        h = (100.0 * h).min(h1).min(length);
    }
    h = h.max(h_min);

    let mut last_err: Option<E> = None;
    while next < n_out {
        if stats.accepted + stats.rejected >= opts.max_steps {
            break;
        }
        if length - s <= 0.0 {
            break;
        }
        h = h.min(length - s);
        let hs = dir * h;
        let stage = (|| -> Result<_, E> {
            let k2 = f(dir * s + C2 * hs, &combo(&y, hs, &[(A21, &k1)]))?;
            let k3 = f(dir * s + C3 * hs, &combo(&y, hs, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = f(dir * s + C4 * hs, &combo(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = f(
                dir * s + C5 * hs,
                &combo(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = f(
                dir * s + hs,
                &combo(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )?;
            let y1 = combo(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = f(dir * s + hs, &y1)?;
            Ok((k2, k3, k4, k5, k6, k7, y1))
        })();
        let (k3, k4, k5, k6, k7, y1) = match stage {
            Ok((_, k3, k4, k5, k6, k7, y1)) => {
                stats.evaluations += 6;
                (k3, k4, k5, k6, k7, y1)
            }
            Err(e) => {
                stats.evaluations += 1;
                stats.rejected += 1;
                if h * 0.25 < h_min {
                    last_err = Some(e);
                    break;
                }
                h *= 0.25;
                continue;
            }
        };

        let mut err2 = 0.0;
        for i in 0..N {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            err2 += (e / scale).powi(2);
        }
        let err = (err2 / N as f64).sqrt();
        if !err.is_finite() {
            stats.rejected += 1;
            if h * 0.25 < h_min {
                break;
            }
            h *= 0.25;
            continue;
        }
        let fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
        if err > 1.0 {
            stats.rejected += 1;
            h *= fac.min(1.0);
            if h < h_min {
                break;
            }
            continue;
        }

        if let Err(e) = guard(&y, &y1) {
            stats.rejected += 1;
            if h * 0.25 < h_min {
                last_err = Some(e);
                break;
            }
            h *= 0.25;
            continue;
        }

        stats.accepted += 1;
        let s1 = if length - (s + h) <= 1e-14 * length { length } else { s + h };
        // dense output coefficients
        let mut r2 = [0.0; N];
        let mut r3 = [0.0; N];
        let mut r4 = [0.0; N];
        let mut r5 = [0.0; N];
        for i in 0..N {
            r2[i] = y1[i] - y[i];
            r3[i] = hs * k1[i] - r2[i];
            r4[i] = r2[i] - hs * k7[i] - r3[i];
            r5[i] = hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        while next < n_out && grid[next].abs() <= s1 * (1.0 + 1e-15) {
            let th = ((grid[next].abs() - s) / h).clamp(0.0, 1.0);
            let th1 = 1.0 - th;
            let mut yi = [0.0; N];
            for i in 0..N {
                yi[i] = y[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
            }
            if next == n_out - 1 && s1 == length {
                yi = y1;
            }
            out_s.push(grid[next]);
            out_y.push(yi);
            next += 1;
        }
        s = s1;
        y = y1;
        k1 = k7;
        h *= fac;
    }

    let stop = if next < n_out {
        let reason = match last_err {
            Some(e) => StopReason::Failed(e),
            None if stats.accepted + stats.rejected >= opts.max_steps => StopReason::MaxSteps,
            None => StopReason::StepUnderflow,
        };
        Some(Stop {
            s_reached: dir * s,
            reason,
        })
    } else {
        None
    };
    Ok(Integration {
        s: out_s,
        y: out_y,
        stats,
        stop,
    })
}
