//! Order-fixed compensated reductions shared by every module.

/// Neumaier-compensated sum, evaluated strictly left to right.
pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut total = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = total + v;
        if total.abs() >= v.abs() {
            comp += (total - t) + v;
        } else {
            comp += (v - t) + total;
        }
        total = t;
    }
    total + comp
}

/// Arithmetic mean, `None` for an empty input. The result is clamped into
/// `[min, max]` of the inputs, which the exact mean always satisfies.
pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let (lo, hi) = min_max(values)?;
    Some((sum(values.iter().copied()) / values.len() as f64).clamp(lo, hi))
}

/// Population standard deviation (divides by N).
pub fn std_population(values: &[f64]) -> Option<f64> {
    let m = mean(values)?;
    let var = sum(values.iter().map(|v| (v - m) * (v - m))) / values.len() as f64;
    Some(var.max(0.0).sqrt())
}

pub fn min_max(values: &[f64]) -> Option<(f64, f64)> {
    let first = *values.first()?;
    Some(
        values
            .iter()
            .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v))),
    )
}
