//! Adaptive Simpson quadrature on a finite interval.

use crate::{Error, Result};

struct Segment {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Integrate `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// The interval is first cut into 16 panels whose Simpson sum sets the
/// absolute target `rel_tol * |I|`; panels are then halved until the
/// two-halves estimate agrees with the whole-panel one within `15 * tol`,
/// and the Richardson-corrected value is kept. Fails once more than
/// `max_splits` halvings were needed.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rel_tol: f64, max_splits: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    const PANELS: usize = 16;
    let h = (b - a) / PANELS as f64;
    let mut stack = Vec::with_capacity(64);
    let mut rough = 0.0;
    for k in 0..PANELS {
        let lo = a + h * k as f64;
        let hi = if k + 1 == PANELS { b } else { lo + h };
        let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
        let whole = simpson(lo, hi, fa, fm, fb);
        rough += whole;
        stack.push(Segment {
            a: lo,
            b: hi,
            fa,
            fm,
            fb,
            whole,
            tol: 0.0,
        });
    }
    let abs_tol = (rel_tol * rough.abs()).max(f64::MIN_POSITIVE);
    for s in &mut stack {
        s.tol = abs_tol / PANELS as f64;
    }

    let mut total = 0.0;
    let mut splits = 0usize;
    while let Some(s) = stack.pop() {
        let m = 0.5 * (s.a + s.b);
        let (lm, rm) = (0.5 * (s.a + m), 0.5 * (m + s.b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(s.a, m, s.fa, flm, s.fm);
        let right = simpson(m, s.b, s.fm, frm, s.fb);
        let delta = left + right - s.whole;
        if delta.abs() <= 15.0 * s.tol || m <= s.a || m >= s.b {
            total += left + right + delta / 15.0;
            continue;
        }
        splits += 1;
        if splits > max_splits {
            return Err(Error::QuadratureDiverged {
                tol: rel_tol,
                steps: max_splits,
            });
        }
        let tol = 0.5 * s.tol;
        stack.push(Segment {
            a: s.a,
            b: m,
            fa: s.fa,
            fm: flm,
            fb: s.fm,
            whole: left,
            tol,
        });
        stack.push(Segment {
            a: m,
            b: s.b,
            fa: s.fm,
            fm: frm,
            fb: s.fb,
            whole: right,
            tol,
        });
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_exponentials() {
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12, 1_000_000).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        let v = adaptive_simpson(|x| (-3.0 * x).exp(), 0.0, 5.0, 1e-12, 1_000_000).unwrap();
        let exact = (1.0 - (-15.0f64).exp()) / 3.0;
        assert!(((v - exact) / exact).abs() < 1e-12);
        assert_eq!(adaptive_simpson(|x| x, 1.0, 1.0, 1e-10, 10).unwrap(), 0.0);
    }

    #[test]
    fn refinement_cap_is_reported() {
        let wild = |x: f64| (1.0 / (x + 1e-9)).sin();
        assert!(matches!(
            adaptive_simpson(wild, 0.0, 1.0, 1e-14, 100),
            Err(Error::QuadratureDiverged { .. })
        ));
    }
}
