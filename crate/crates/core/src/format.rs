//! Decimal formatting shared by every CSV writer.

/// Formats `x` as a plain decimal with 12 significant digits, trailing zeros
/// trimmed. Output depends only on the bits of `x`.
pub fn sig12(x: f64) -> String {
    sig(x, 12)
}

pub fn sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // `{:e}` rounds correctly; rebuild the positional form from its mantissa.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa),
    };
    let mdigits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let point = exp + 1; // digits before the decimal point
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        for _ in 0..(-point) {
            out.push('0');
        }
        out.push_str(&mdigits);
    } else {
        let point = point as usize;
        if point >= mdigits.len() {
            out.push_str(&mdigits);
            for _ in 0..(point - mdigits.len()) {
                out.push('0');
            }
        } else {
            out.push_str(&mdigits[..point]);
            out.push('.');
            out.push_str(&mdigits[point..]);
        }
    }
    if out.contains('.') {
        let trimmed = out.trim_end_matches('0').trim_end_matches('.');
        out = trimmed.to_string();
    }
    out
}

/// One newline-terminated CSV record, quoting fields only where needed.
pub fn csv_record<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(fields).expect("writing to memory");
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("fields are UTF-8")
}

/// Lossless round-trip representation (shortest digits that parse back to
/// the same `f64`).
pub fn exact(x: f64) -> String {
    format!("{x:?}")
}
