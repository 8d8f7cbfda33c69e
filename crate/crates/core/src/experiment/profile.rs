use serde::Serialize;

use super::TrialTrace;

/// Mean closure-update time for inserts made while `|H|` was in
/// `[closure_size_lo, closure_size_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub closure_size_lo: usize,
    pub closure_size_hi: usize,
    pub mean_closure_size: f64,
    pub mean_insert_runtime_us: f64,
    pub count: usize,
}

/// Buckets every query insert by the closure size before the insert into
/// `n_buckets` equal-width bins; empty bins are omitted.
pub fn runtime_profile(traces: &[TrialTrace], n_buckets: usize) -> Vec<ProfileRow> {
    let mut points: Vec<(usize, f64)> = Vec::new();
    for t in traces {
        for w in t.records.windows(2) {
            if w[1].pair.is_some() {
                points.push((w[0].closure_size, w[1].insert_runtime_us));
            }
        }
    }
    if points.is_empty() || n_buckets == 0 {
        return Vec::new();
    }
    let lo = points.iter().map(|p| p.0).min().expect("non-empty");
    let hi = points.iter().map(|p| p.0).max().expect("non-empty");
    let width = ((hi - lo) / n_buckets + 1).max(1);
    let mut sums = vec![(0usize, 0.0f64, 0usize); n_buckets + 1];
    for &(size, rt) in &points {
        let b = (size - lo) / width;
        sums[b].0 += size;
        sums[b].1 += rt;
        sums[b].2 += 1;
    }
    sums.iter()
        .enumerate()
        .filter(|(_, s)| s.2 > 0)
        .map(|(b, &(size_sum, rt_sum, count))| ProfileRow {
            closure_size_lo: lo + b * width,
            closure_size_hi: lo + (b + 1) * width - 1,
            mean_closure_size: size_sum as f64 / count as f64,
            mean_insert_runtime_us: rt_sum / count as f64,
            count,
        })
        .collect()
}

/// `runtime ≈ coefficient * size^exponent`, fitted by least squares in
/// log-log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLaw {
    pub exponent: f64,
    pub coefficient: f64,
    pub r_squared: f64,
}

/// Needs at least two rows with positive size and runtime.
pub fn fit_power_law(rows: &[ProfileRow]) -> Option<PowerLaw> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.mean_closure_size > 0.0 && r.mean_insert_runtime_us > 0.0)
        .map(|r| (r.mean_closure_size.ln(), r.mean_insert_runtime_us.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(PowerLaw {
        exponent: slope,
        coefficient: intercept.exp(),
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(size: f64, rt: f64) -> ProfileRow {
        ProfileRow {
            closure_size_lo: 0,
            closure_size_hi: 0,
            mean_closure_size: size,
            mean_insert_runtime_us: rt,
            count: 1,
        }
    }

    #[test]
    fn exact_power_law_is_recovered() {
        let rows: Vec<ProfileRow> = [10.0, 20.0, 40.0, 80.0].iter().map(|&s| row(s, 3.0 * s * s)).collect();
        let fit = fit_power_law(&rows).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-9);
        assert!((fit.coefficient - 3.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_power_law(&[row(5.0, 1.0)]).is_none());
        assert!(fit_power_law(&[row(5.0, 1.0), row(5.0, 2.0)]).is_none());
        assert!(runtime_profile(&[], 10).is_empty());
    }
}
