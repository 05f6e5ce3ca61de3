//! Exact rational arithmetic used for every certified quantity.

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Parses the strict `"p/q"` form. Integers are accepted as `"p"`; decimal
/// notation is rejected.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::BadRational(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let is_int = |x: &str| {
        let digits = x.strip_prefix('-').unwrap_or(x);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !is_int(num) || !is_int(den) || den.starts_with('-') {
        return Err(bad());
    }
    let n: i64 = num.parse().map_err(|_| bad())?;
    let d: i64 = den.parse().map_err(|_| bad())?;
    if d == 0 {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn parse_positive_rational(s: &str) -> Result<Rational> {
    let q = parse_rational(s)?;
    if q <= Rational::zero() {
        return Err(Error::BadRational(s.to_string()));
    }
    Ok(q)
}

pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// `count / total` as an exact rational; `0/1` when `total` is zero.
pub fn ratio(count: usize, total: usize) -> Rational {
    if total == 0 {
        Rational::zero()
    } else {
        Rational::new(count as i64, total as i64)
    }
}

pub fn one() -> Rational {
    Rational::one()
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_rational_opt {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        q: &Option<Rational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_str(&format_rational(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Rational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_form() {
        assert_eq!(parse_rational("1/4").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational("-6/8").unwrap(), Rational::new(-3, 4));
        assert_eq!(parse_rational("3").unwrap(), Rational::from_integer(3));
    }

    #[test]
    fn rejects_decimals_and_zero_denominators() {
        assert!(parse_rational("0.25").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1/-2").is_err());
        assert!(parse_positive_rational("0/3").is_err());
    }

    #[test]
    fn format_is_reduced() {
        assert_eq!(format_rational(&Rational::new(2, 8)), "1/4");
        assert_eq!(ratio(0, 0), Rational::zero());
    }
}
