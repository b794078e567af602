//! Chi-squared feature screening: quantile binning, Pearson statistic,
//! and the regularized incomplete gamma function for the p-value.

use crate::data::Dataset;
use crate::error::{Error, Result};

const LANCZOS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// Natural log of the gamma function (Lanczos, g = 7).
pub fn ln_gamma(z: f64) -> f64 {
    if z < 0.5 {
        // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z).
        let pi = std::f64::consts::PI;
        pi.ln() - (pi * z).sin().abs().ln() - ln_gamma(1.0 - z)
    } else {
        let z = z - 1.0;
        let mut x = LANCZOS[0];
        for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
            x += c / (z + i as f64);
        }
        let t = z + 7.5;
        0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
    }
}

/// Regularized lower incomplete gamma P(a, x), via the power series for
/// x < a+1 and the Lentz continued fraction otherwise.
pub fn regularized_gamma_p(a: f64, x: f64) -> Result<f64> {
    if a <= 0.0 || x < 0.0 || !a.is_finite() || !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "regularized gamma needs a > 0, x >= 0, got a = {a}, x = {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        for n in 1..10_000 {
            term *= x / (a + n as f64);
            sum += term;
            if term.abs() < sum.abs() * 1e-15 {
                return Ok((sum * log_prefactor.exp()).clamp(0.0, 1.0));
            }
        }
        Err(Error::InvalidArgument("incomplete gamma series failed to converge".into()))
    } else {
        // Continued fraction for Q(a, x), modified Lentz.
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-15 {
                let q = (log_prefactor.exp() * h).clamp(0.0, 1.0);
                return Ok(1.0 - q);
            }
        }
        Err(Error::InvalidArgument("incomplete gamma fraction failed to converge".into()))
    }
}

/// Survival function of the chi-squared distribution with `dof` degrees
/// of freedom: the p-value of a Pearson statistic.
pub fn chi2_sf(stat: f64, dof: usize) -> Result<f64> {
    if dof == 0 {
        return Err(Error::InvalidArgument("chi-squared needs dof >= 1".into()));
    }
    if stat < 0.0 {
        return Err(Error::InvalidArgument(format!("negative statistic {stat}")));
    }
    Ok(1.0 - regularized_gamma_p(dof as f64 / 2.0, stat / 2.0)?)
}

/// Quantile bin index per value. Ties land in the same bin by
/// construction (the bin is a function of the value alone), so heavily
/// repeated values collapse bins instead of splitting them.
pub fn quantile_bins(values: &[f64], n_bins: usize) -> Result<Vec<usize>> {
    if n_bins < 2 {
        return Err(Error::InvalidArgument("need at least 2 bins".into()));
    }
    if values.is_empty() {
        return Err(Error::InvalidArgument("cannot bin an empty column".into()));
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let edges: Vec<f64> = (1..n_bins).map(|i| sorted[i * n / n_bins]).collect();
    Ok(values.iter().map(|&v| edges.partition_point(|&e| e <= v)).collect())
}

fn dense_remap(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut seen: Vec<usize> = labels.to_vec();
    seen.sort_unstable();
    seen.dedup();
    let remapped = labels
        .iter()
        .map(|l| seen.binary_search(l).expect("label came from the same list"))
        .collect();
    (remapped, seen.len())
}

fn target_categories(data: &Dataset, n_bins: usize) -> Result<(Vec<usize>, usize)> {
    let labels = if data.is_binary_target() {
        data.y.iter().map(|&v| v as usize).collect()
    } else {
        quantile_bins(data.y.as_slice().expect("contiguous"), n_bins)?
    };
    Ok(dense_remap(&labels))
}

/// Pearson chi-squared independence screen of every feature against the
/// target. Continuous columns are quantile-binned; constant features get
/// p = 1 by convention.
pub fn chi2_screen(data: &Dataset, n_bins: usize) -> Result<Vec<f64>> {
    if data.n_rows() < 50 {
        return Err(Error::InvalidArgument(format!(
            "chi-squared screen needs at least 50 rows, got {}",
            data.n_rows()
        )));
    }
    let n = data.n_rows();
    let (target, n_cat) = target_categories(data, n_bins)?;
    let mut p_values = Vec::with_capacity(data.n_features());
    for j in 0..data.n_features() {
        let column: Vec<f64> = data.x.column(j).to_vec();
        let lo = column.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = column.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi || n_cat < 2 {
            p_values.push(1.0);
            continue;
        }
        let (bins, r) = dense_remap(&quantile_bins(&column, n_bins)?);
        if r < 2 {
            p_values.push(1.0);
            continue;
        }
        let mut table = vec![vec![0.0_f64; n_cat]; r];
        for (row, &cat) in bins.iter().zip(&target) {
            table[*row][cat] += 1.0;
        }
        let row_tot: Vec<f64> = table.iter().map(|row| row.iter().sum()).collect();
        let col_tot: Vec<f64> =
            (0..n_cat).map(|c| table.iter().map(|row| row[c]).sum()).collect();
        let mut stat = 0.0;
        for (i, row) in table.iter().enumerate() {
            for (c, &observed) in row.iter().enumerate() {
                let expected = row_tot[i] * col_tot[c] / n as f64;
                if expected > 0.0 {
                    stat += (observed - expected).powi(2) / expected;
                }
            }
        }
        p_values.push(chi2_sf(stat, (r - 1) * (n_cat - 1))?);
    }
    Ok(p_values)
}
