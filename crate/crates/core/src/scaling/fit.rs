//! Least-squares lines and windowed slope envelopes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual.
    pub rms: f64,
    /// Standard error of the slope.
    pub slope_stderr: f64,
    pub points: usize,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return Err(Error::DegenerateFit(format!("{n} points")));
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if !(sxx > 0.0) || !sxy.is_finite() {
        return Err(Error::DegenerateFit("abscissae do not vary or values are not finite".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let rms = (sse / n as f64).sqrt();
    let slope_stderr = if n > 2 { (sse / (n - 2) as f64 / sxx).sqrt() } else { 0.0 };
    Ok(LineFit { slope, intercept, rms, slope_stderr, points: n })
}

/// Power-law exponent with the envelope of windowed local slopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    /// `log10 t` range of the fit.
    pub window: (f64, f64),
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub slope_inf: f64,
    pub slope_sup: f64,
    pub stderr: f64,
}

impl ScalingFit {
    /// Half-width of the slope envelope, or the standard error if larger.
    pub fn ci(&self) -> f64 {
        (0.5 * (self.slope_sup - self.slope_inf)).max(self.stderr)
    }

    /// Same fit with every slope divided by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> ScalingFit {
        ScalingFit {
            exponent: self.exponent / factor,
            slope_inf: self.slope_inf / factor,
            slope_sup: self.slope_sup / factor,
            stderr: self.stderr / factor,
            residual: self.residual,
            window: self.window,
        }
    }
}

/// Fit window: the last `decades` of the abscissa, with sliding windows of
/// `slide` decades for the envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub decades: f64,
    pub slide: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self { decades: 1.5, slide: 0.5 }
    }
}

/// Slope of `log y` against `log t` over the last `window.decades`.
pub fn fit_power_law(ts: &[f64], ys: &[f64], window: &FitWindow) -> Result<ScalingFit> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(ys)
        .filter(|(t, y)| **t > 0.0 && **y > 0.0 && y.is_finite())
        .map(|(t, y)| (t.log10(), y.log10()))
        .collect();
    let top = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let from = top - window.decades - 1e-9;
    let used: Vec<(f64, f64)> = pts.into_iter().filter(|p| p.0 >= from).collect();
    let xs: Vec<f64> = used.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.1).collect();
    let line = linear_fit(&xs, &ys)?;
    let mut inf = line.slope;
    let mut sup = line.slope;
    for (i, &x0) in xs.iter().enumerate() {
        let end = xs.iter().rposition(|&x| x <= x0 + window.slide + 1e-9).expect("contains x0");
        if end > i && xs[end] - x0 >= window.slide - 1e-9 {
            let local = linear_fit(&xs[i..=end], &ys[i..=end])?;
            inf = inf.min(local.slope);
            sup = sup.max(local.slope);
        }
    }
    let low = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ScalingFit {
        exponent: line.slope,
        window: (low, top),
        residual: line.rms,
        slope_inf: inf,
        slope_sup: sup,
        stderr: line.slope_stderr,
    })
}

/// Least squares `z = c + a x + b y`; returns `(c, a, b, rms)`.
pub fn plane_fit(xs: &[f64], ys: &[f64], zs: &[f64]) -> Result<(f64, f64, f64, f64)> {
    let n = xs.len();
    if n < 3 || ys.len() != n || zs.len() != n {
        return Err(Error::DegenerateFit(format!("{n} points for a plane")));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my, mz) = (mean(xs), mean(ys), mean(zs));
    let (mut sxx, mut syy, mut sxy, mut sxz, mut syz) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let (x, y, z) = (xs[i] - mx, ys[i] - my, zs[i] - mz);
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        sxz += x * z;
        syz += y * z;
    }
    let det = sxx * syy - sxy * sxy;
    if !(det.abs() > 1e-12 * (sxx * syy).max(1e-300)) {
        return Err(Error::DegenerateFit("regressors are collinear".into()));
    }
    let a = (sxz * syy - syz * sxy) / det;
    let b = (syz * sxx - sxz * sxy) / det;
    let c = mz - a * mx - b * my;
    let sse: f64 = (0..n).map(|i| (zs[i] - c - a * xs[i] - b * ys[i]).powi(2)).sum();
    Ok((c, a, b, (sse / n as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_envelope_brackets_exponent() {
        let ts: Vec<f64> = (0..=24).map(|i| 10f64.powf(i as f64 / 8.0)).collect();
        let ys: Vec<f64> = ts.iter().map(|t| t.powf(0.7) * (1.0 + 0.1 * (3.0 * t.ln()).sin())).collect();
        let f = fit_power_law(&ts, &ys, &FitWindow::default()).unwrap();
        assert!(f.slope_inf <= f.exponent && f.exponent <= f.slope_sup);
        assert!((f.exponent - 0.7).abs() < 0.05);
        assert!((f.window.0 - 1.5).abs() < 1e-9 && (f.window.1 - 3.0).abs() < 1e-9);
        let exact: Vec<f64> = ts.iter().map(|t| 3.0 * t * t).collect();
        let g = fit_power_law(&ts, &exact, &FitWindow::default()).unwrap();
        assert!((g.exponent - 2.0).abs() < 1e-12 && g.ci() < 1e-10);
    }

    #[test]
    fn plane_recovers_coefficients() {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut zs = Vec::new();
        for i in 0..5 {
            for k in 0..4 {
                xs.push(i as f64);
                ys.push(k as f64 * 0.5);
                zs.push(1.0 + 2.0 * i as f64 - 0.5 * k as f64 * 0.5);
            }
        }
        let (c, a, b, rms) = plane_fit(&xs, &ys, &zs).unwrap();
        assert!((c - 1.0).abs() < 1e-12 && (a - 2.0).abs() < 1e-12 && (b + 0.5).abs() < 1e-12 && rms < 1e-12);
    }

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15 && (f.intercept + 1.0).abs() < 1e-15);
        assert!(f.rms < 1e-15);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }
}
