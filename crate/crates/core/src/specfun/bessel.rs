//! Modified Bessel functions of the first kind, integer order.
//!
//! Everything is computed in exponentially scaled form `e^{-x} I_ν(x)`;
//! the unscaled value is only produced below [`BESSEL_OVERFLOW_X`].

use super::SpecialError;

/// Largest argument for which [`bessel_i`] returns an unscaled value.
/// `I_0(x)` itself overflows f64 just below x = 714.
pub const BESSEL_OVERFLOW_X: f64 = 700.0;

/// Below this argument the power series is used; above it, Miller's
/// backward recurrence normalized by `I_0 + 2 Σ I_k = e^x`.
const SERIES_LIMIT: f64 = 30.0;

/// `I_ν(x)` for integer `ν ≥ 0`, `0 ≤ x ≤ 700`.
pub fn bessel_i(nu: u32, x: f64) -> Result<f64, SpecialError> {
    if !(x >= 0.0) {
        return Err(SpecialError::Domain {
            what: "bessel_i: x must be >= 0",
            value: x,
        });
    }
    if x > BESSEL_OVERFLOW_X {
        return Err(SpecialError::Overflow {
            what: "bessel_i",
            value: x,
        });
    }
    Ok(bessel_i_scaled(nu, x) * x.exp())
}

/// `e^{-x} I_ν(x)`, finite for every `x ≥ 0`.
pub fn bessel_i_scaled(nu: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_LIMIT {
        scaled_series(nu, x)
    } else {
        scaled_sequence_miller(x, nu as usize)[nu as usize]
    }
}

/// `e^{-x} I_k(x)` for `k = 0..=max_order`.
pub fn bessel_i_scaled_sequence(x: f64, max_order: usize) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; max_order + 1];
        v[0] = 1.0;
        return v;
    }
    if x <= SERIES_LIMIT {
        return (0..=max_order)
            .map(|k| scaled_series(k as u32, x))
            .collect();
    }
    let mut v = scaled_sequence_miller(x, max_order);
    v.truncate(max_order + 1);
    v
}

/// Incremental source of `e^{-x} I_k(x)` for k = 0, 1, 2, ...; used by the
/// Marcum series, which does not know its truncation order up front.
pub(crate) struct ScaledBesselOrders {
    x: f64,
    k: usize,
    // Leading series factor (x/2)^k / k!.
    lead: f64,
    table: Option<Vec<f64>>,
}

impl ScaledBesselOrders {
    pub(crate) fn new(x: f64) -> Self {
        let table = (x > SERIES_LIMIT).then(|| {
            let order = 30 + (9.0 * x.sqrt()).ceil() as usize;
            scaled_sequence_miller(x, order)
        });
        Self {
            x,
            k: 0,
            lead: 1.0,
            table,
        }
    }
}

impl Iterator for ScaledBesselOrders {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let k = self.k;
        self.k += 1;
        if self.x == 0.0 {
            return Some(if k == 0 { 1.0 } else { 0.0 });
        }
        match &self.table {
            // Orders beyond the table are below 1e-30 relative to I_0.
            Some(t) => Some(t.get(k).copied().unwrap_or(0.0)),
            None => {
                if k > 0 {
                    self.lead *= 0.5 * self.x / k as f64;
                }
                Some(series_tail(k as u32, self.x, self.lead) * (-self.x).exp())
            }
        }
    }
}

fn scaled_series(nu: u32, x: f64) -> f64 {
    let mut lead = 1.0;
    for k in 1..=nu {
        lead *= 0.5 * x / k as f64;
    }
    series_tail(nu, x, lead) * (-x).exp()
}

/// `lead · Σ_j (x²/4)^j / (j! (ν+1)...(ν+j))` with `lead = (x/2)^ν / ν!`.
fn series_tail(nu: u32, x: f64, lead: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = lead;
    let mut sum = lead;
    let mut j = 0u32;
    loop {
        j += 1;
        term *= q / (j as f64 * (nu + j) as f64);
        sum += term;
        if term <= sum * 1e-17 {
            return sum;
        }
    }
}

fn scaled_sequence_miller(x: f64, max_order: usize) -> Vec<f64> {
    let start = max_order + 16 + (12.0 * x.sqrt()).ceil() as usize;
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1e-280;
    let mut norm = 0.0;
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        let prev = vals[k + 1] + k as f64 * two_over_x * vals[k];
        vals[k - 1] = prev;
        norm += 2.0 * vals[k];
        if prev > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
            norm *= 1e-250;
        }
    }
    norm += vals[0];
    for v in vals.iter_mut() {
        *v /= norm;
    }
    vals
}
