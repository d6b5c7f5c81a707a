//! Extended-precision evaluation of the tree example's limit expression.
//!
//! The bracketed expression subtracts two terms of size ~ m² ln m to leave an
//! O(1) result, so double precision loses about log10(m² ln m) digits. Values
//! here are computed with a software float of at least [`MIN_BITS`] bits and,
//! when the guard is on, recomputed at twice the precision; disagreement
//! beyond [`GUARD_DIGITS`] significant digits is an error.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

use crate::error::{Error, Result};

/// 40 significant decimal digits.
pub const MIN_BITS: usize = 133;
pub const DEFAULT_BITS: usize = 256;
/// Digits that must survive the 2×-precision comparison.
pub const GUARD_DIGITS: i32 = 25;

const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    pub bits: usize,
    pub guard: bool,
}

impl Default for Precision {
    fn default() -> Self {
        Self {
            bits: DEFAULT_BITS,
            guard: true,
        }
    }
}

impl Precision {
    pub fn bits(bits: usize) -> Self {
        Self { bits, guard: true }
    }

    pub fn unguarded(bits: usize) -> Self {
        Self { bits, guard: false }
    }

    pub fn check(&self) -> Result<()> {
        if self.bits < MIN_BITS {
            return Err(Error::InsufficientPrecision {
                bits: self.bits,
                required: MIN_BITS,
            });
        }
        Ok(())
    }
}

/// A high-precision result: nearest double plus a decimal rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct HpValue {
    pub value: f64,
    pub decimal: String,
    /// Relative gap to the 2×-precision recomputation (0 when unguarded).
    pub guard_gap: f64,
}

impl HpValue {
    /// Decimal rendering rounded to `digits` significant digits.
    pub fn sig(&self, digits: usize) -> String {
        round_decimal(&self.decimal, digits)
    }
}

struct Ctx {
    p: usize,
    cc: Consts,
}

impl Ctx {
    fn new(p: usize) -> Self {
        Self {
            p,
            cc: Consts::new().expect("astro-float constant cache"),
        }
    }
    fn int(&self, v: u64) -> BigFloat {
        BigFloat::from_u64(v, self.p)
    }
    fn real(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.p)
    }
    fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(self.p, RM, &mut self.cc)
    }
    fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(self.p, RM, &mut self.cc)
    }
    fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }
    fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }
    fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }
    fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }
    fn format(&mut self, x: &BigFloat) -> String {
        x.format(Radix::Dec, RM, &mut self.cc)
            .unwrap_or_else(|_| "NaN".to_string())
    }
}

/// m² ln m − m^{2p+2} (ln m)^{p+1} · (T₁ + T₂) / (W₁ + W₂) where
///   T₁ = m^{2p+1} (ln m)^{p+ε} / ((m+1)^{2p} (ln(m+1))^p),
///   T₂ = (m−1)^{2p+1} (ln(m−1))^{p+ε} / ((m−1)^{2p} (ln(m−1))^p),
///   W₁ = m^{2p+1} (ln m)^{p+ε},  W₂ = (m−1)^{2p+1} (ln(m−1))^{p+ε}.
/// Every power is taken as exp(exponent · log) at working precision.
fn bracket(ctx: &mut Ctx, m: u64, sigma: f64, epsilon: f64) -> BigFloat {
    let one = ctx.int(1);
    let two = ctx.int(2);
    let p = ctx.div(&one, &ctx.sub(&ctx.real(sigma), &one));
    let eps = ctx.real(epsilon);
    let two_p = ctx.mul(&two, &p);
    let two_p1 = ctx.add(&two_p, &one);
    let two_p2 = ctx.add(&two_p, &two);
    let p_eps = ctx.add(&p, &eps);
    let p1 = ctx.add(&p, &one);

    let l0 = ctx.ln(&ctx.int(m));
    let lp = ctx.ln(&ctx.int(m + 1));
    let lm = ctx.ln(&ctx.int(m - 1));
    let ll0 = ctx.ln(&l0);
    let llp = ctx.ln(&lp);
    let llm = ctx.ln(&lm);

    // log W₁, log W₂
    let log_w1 = ctx.add(&ctx.mul(&two_p1, &l0), &ctx.mul(&p_eps, &ll0));
    let log_w2 = ctx.add(&ctx.mul(&two_p1, &lm), &ctx.mul(&p_eps, &llm));
    // log of the u-denominators (m±1)^{2p} (ln(m±1))^p
    let log_dp = ctx.add(&ctx.mul(&two_p, &lp), &ctx.mul(&p, &llp));
    let log_dm = ctx.add(&ctx.mul(&two_p, &lm), &ctx.mul(&p, &llm));

    let t1 = ctx.exp(&ctx.sub(&log_w1, &log_dp));
    let t2 = ctx.exp(&ctx.sub(&log_w2, &log_dm));
    let w1 = ctx.exp(&log_w1);
    let w2 = ctx.exp(&log_w2);
    let pref = ctx.exp(&ctx.add(&ctx.mul(&two_p2, &l0), &ctx.mul(&p1, &ll0)));

    let mf = ctx.int(m);
    let head = ctx.mul(&ctx.mul(&mf, &mf), &l0);
    let frac = ctx.div(&ctx.add(&t1, &t2), &ctx.add(&w1, &w2));
    ctx.sub(&head, &ctx.mul(&pref, &frac))
}

fn eval_at(bits: usize, m: u64, sigma: f64, epsilon: f64) -> (f64, String) {
    let mut ctx = Ctx::new(bits);
    let v = bracket(&mut ctx, m, sigma, epsilon);
    let s = ctx.format(&v);
    (s.parse::<f64>().unwrap_or(f64::NAN), s)
}

/// The limit-expression bracket evaluated at integer argument `m >= 3`.
pub fn bracket_hp(m: u64, sigma: f64, epsilon: f64, precision: Precision) -> Result<HpValue> {
    precision.check()?;
    if m < 3 {
        return Err(Error::param("n", format!("{m} < 3 puts ln(n − 1) at or below 0")));
    }
    let (value, decimal) = eval_at(precision.bits, m, sigma, epsilon);
    let mut guard_gap = 0.0;
    if precision.guard {
        let mut ctx = Ctx::new(2 * precision.bits);
        let hi = bracket(&mut ctx, m, sigma, epsilon);
        let lo = BigFloat::parse(&decimal, Radix::Dec, 2 * precision.bits, RM, &mut ctx.cc);
        let diff = ctx.sub(&hi, &lo);
        let ratio = ctx.div(&diff, &hi);
        let gap = ctx.format(&ratio).parse::<f64>().unwrap_or(f64::INFINITY).abs();
        guard_gap = gap;
        if !(gap <= 10f64.powi(-GUARD_DIGITS)) || !value.is_finite() {
            return Err(Error::PrecisionGuard {
                n: m,
                detail: format!(
                    "{}-bit and {}-bit evaluations differ by relative {gap:e}",
                    precision.bits,
                    2 * precision.bits
                ),
            });
        }
    }
    Ok(HpValue {
        value,
        decimal,
        guard_gap,
    })
}

/// Rounds a decimal string `[-]d.ddd…e±x` (or a plain decimal) to `digits`
/// significant digits, half away from zero.
pub fn round_decimal(s: &str, digits: usize) -> String {
    let digits = digits.max(1);
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let all: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes())
        .map(|b| b - b'0')
        .collect();
    // exponent of the first digit in `all`
    let mut lead_exp = exp + int_part.len() as i64 - 1;
    let first = match all.iter().position(|&d| d != 0) {
        Some(i) => i,
        None => return format!("{}0.{}e0", if neg { "-" } else { "" }, "0".repeat(digits - 1)),
    };
    lead_exp -= first as i64;
    let sig = &all[first..];
    let mut kept: Vec<u8> = sig.iter().copied().take(digits).collect();
    kept.resize(digits, 0);
    if sig.get(digits).is_some_and(|&d| d >= 5) {
        let mut i = digits;
        loop {
            if i == 0 {
                kept.insert(0, 1);
                kept.truncate(digits);
                lead_exp += 1;
                break;
            }
            i -= 1;
            if kept[i] == 9 {
                kept[i] = 0;
            } else {
                kept[i] += 1;
                break;
            }
        }
    }
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push((b'0' + kept[0]) as char);
    if digits > 1 {
        out.push('.');
        out.extend(kept[1..].iter().map(|&d| (b'0' + d) as char));
    }
    out.push_str(&format!("e{lead_exp}"));
    out
}
