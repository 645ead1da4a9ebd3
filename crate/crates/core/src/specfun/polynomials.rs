use crate::error::{Error, Result};

/// Generalised Laguerre polynomial `L_n^alpha(x)` by the three-term recurrence.
pub fn laguerre(n: u32, alpha: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Gegenbauer polynomial `C_v^l(cos delta_phi)` written as the cosine sum
/// The weights `(l)_s (l)_{v-s} / (s! (v-s)!)` for `s = 0..=v`.
///
/// They are built multiplicatively from the `s = 0` term, so no Gamma
/// function of a large argument is ever formed.
pub fn gegenbauer_weights(l: u32, v: u32) -> Result<Vec<f64>> {
    if l == 0 {
        return Err(Error::InvalidArgument("gegenbauer index l must be >= 1".into()));
    }
    let lf = l as f64;
    let vf = v as f64;
    // c_0 = (l)_v / v!
    let mut c = 1.0;
    for j in 0..v {
        c *= (lf + j as f64) / (j as f64 + 1.0);
    }
    let mut out = Vec::with_capacity(v as usize + 1);
    for s in 0..=v {
        out.push(c);
        if s < v {
            let sf = s as f64;
            // c_{s+1} / c_s = (l + s)(v - s) / ((s + 1)(l + v - s - 1))
            c *= (lf + sf) * (vf - sf) / ((sf + 1.0) * (lf + vf - sf - 1.0));
        }
    }
    Ok(out)
}

/// `C_v^l(cos delta_phi) = sum_s w_s cos((v - 2s) delta_phi)` with the
/// weights of [`gegenbauer_weights`].
pub fn gegenbauer_coeff(l: u32, v: u32, delta_phi: f64) -> Result<f64> {
    let weights = gegenbauer_weights(l, v)?;
    Ok(weights.iter().enumerate().map(|(s, w)| w * ((v as f64 - 2.0 * s as f64) * delta_phi).cos()).sum())
}
