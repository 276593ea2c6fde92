//! Row counts written as `1000000`, `1_000_000`, `10^6` or `1e6`.

pub fn parse(s: &str) -> Result<u64, String> {
    let t: String = s.trim().chars().filter(|&c| c != '_').collect();
    let bad = || format!("invalid count {s:?} (examples: 5000, 10^6, 1e6)");
    let power = |base: &str, exp: &str| -> Result<u64, String> {
        let base: u64 = base.parse().map_err(|_| bad())?;
        let exp: u32 = exp.parse().map_err(|_| bad())?;
        base.checked_pow(exp).ok_or_else(|| format!("count {s:?} overflows"))
    };
    if let Some((base, exp)) = t.split_once('^') {
        power(base, exp)
    } else if let Some((mantissa, exp)) = t.split_once(['e', 'E']) {
        let m: u64 = mantissa.parse().map_err(|_| bad())?;
        m.checked_mul(power("10", exp)?)
            .ok_or_else(|| format!("count {s:?} overflows"))
    } else {
        t.parse().map_err(|_| bad())
    }
}
