//! Value lists on the command line: `a,b,c`, `lin:lo:hi:n` or `log:lo:hi:n`.

pub fn parse(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    let ranged = |kind: &str, rest: &str| -> Result<Vec<f64>, String> {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected {kind}:lo:hi:n, got `{spec}`"));
        }
        let lo: f64 = number(parts[0])?;
        let hi: f64 = number(parts[1])?;
        let n: usize = parts[2].trim().parse().map_err(|_| format!("bad point count `{}`", parts[2]))?;
        if n == 0 {
            return Err("a grid needs at least one point".into());
        }
        let geometric = kind == "log";
        if geometric && !(lo > 0.0 && hi > 0.0) {
            return Err(format!("log grid needs positive ends, got {lo} and {hi}"));
        }
        let (a, b) = if geometric { (lo.ln(), hi.ln()) } else { (lo, hi) };
        Ok((0..n)
            .map(|k| {
                let v = if n == 1 { a } else { a + (b - a) * k as f64 / (n - 1) as f64 };
                if geometric { v.exp() } else { v }
            })
            .collect())
    };
    if let Some(rest) = spec.strip_prefix("log:") {
        return ranged("log", rest);
    }
    if let Some(rest) = spec.strip_prefix("lin:") {
        return ranged("lin", rest);
    }
    let values = spec.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("empty list".into());
    }
    Ok(values)
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: `{}`", s.trim()))?;
    if v.is_nan() {
        return Err("NaN is not a grid value".into());
    }
    Ok(v)
}
