//! Input grammar for numbers and rationals.
//!
//! Accepted alpha forms:
//!   golden               the all-ones stream
//!   [0;a1,a2,...]        exact rational given by its full expansion
//!   periodic:pre|rep     eventually periodic digits (pre may be empty)
//!   random[:seed]        certified digits from seeded random bits
//!   construct:d          block construction targeting average d
//!   file:path            whitespace/comma separated digit prefix from a file
//!
//! Rationals are `p/q`, integers, or exact decimals like `0.4`.

use dal_core::cf::{extract_digits, PartialQuotients};
use dal_core::error::{Error, Result};
use dal_core::extremal::construct_alpha;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;

pub struct AlphaOptions {
    /// Digits the caller expects to consume (constructor sizing).
    pub digits_hint: usize,
    pub bits: u64,
    pub seed: u64,
    pub depth: usize,
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("bad numerator in '{s}'")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("bad denominator in '{s}'")))?;
        if d == BigInt::from(0) {
            return Err(Error::Domain(format!("zero denominator in '{s}'")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let int_part: BigInt = if int.is_empty() {
            BigInt::from(0)
        } else {
            int.parse()
                .map_err(|_| Error::Domain(format!("bad decimal '{s}'")))?
        };
        let digits = frac.trim();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Domain(format!("bad decimal '{s}'")));
        }
        let scale = BigInt::from(10).pow(digits.len() as u32);
        let frac_num: BigInt = digits.parse().unwrap();
        let negative = s.starts_with('-');
        let magnitude = BigRational::from_integer(int_part.clone())
            .abs()
            + BigRational::new(frac_num, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::Domain(format!("'{s}' is not a rational")))?;
    Ok(BigRational::from_integer(n))
}

fn parse_digit_list(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(vec![]);
    }
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<u64>()
                .map_err(|_| Error::Domain(format!("bad digit '{p}'")))
        })
        .collect()
}

pub fn parse_alpha(spec: &str, opts: &AlphaOptions) -> Result<PartialQuotients> {
    let spec = spec.trim();
    if spec == "golden" {
        return Ok(PartialQuotients::golden());
    }
    if let Some(body) = spec.strip_prefix("[0;").and_then(|r| r.strip_suffix(']')) {
        return PartialQuotients::rational(parse_digit_list(body)?);
    }
    if let Some(rest) = spec.strip_prefix("periodic:") {
        let (pre, rep) = rest
            .split_once('|')
            .ok_or_else(|| Error::Domain("periodic form is periodic:pre|rep".into()))?;
        return PartialQuotients::periodic(parse_digit_list(pre)?, parse_digit_list(rep)?);
    }
    if spec == "random" {
        return Ok(extract_digits(opts.bits, opts.seed)?.stream);
    }
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| Error::Domain(format!("bad seed '{seed}'")))?;
        return Ok(extract_digits(opts.bits, seed)?.stream);
    }
    if let Some(d) = spec.strip_prefix("construct:") {
        let d = parse_rational(d)?;
        let len = opts.digits_hint + opts.depth + 50;
        return construct_alpha(&d, len);
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Domain(format!("cannot read {path}: {e}")))?;
        return PartialQuotients::prefix(parse_digit_list(&text)?);
    }
    Err(Error::Domain(format!(
        "unrecognized alpha '{spec}' (try golden, [0;..], periodic:pre|rep, random:seed, \
         construct:d, file:path)"
    )))
}

trait RatAbs {
    fn abs(self) -> Self;
}

impl RatAbs for BigRational {
    fn abs(self) -> Self {
        if self < BigRational::from_integer(BigInt::from(0)) {
            -self
        } else {
            self
        }
    }
}
