use std::fs;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use psd_blocks::function::{parse_real_str, Domain, DomainKind, PreserverFunction};
use psd_blocks::matrix::HermitianMatrix;
use psd_blocks::pattern::PatternRule;
use serde_json::Value;

/// Reads a JSON argument: inline when it starts with `{`, otherwise a path.
pub fn json_arg(what: &str, arg: &str) -> Result<Value> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).with_context(|| format!("reading {what} from {arg}"))?
    };
    serde_json::from_str(&text).with_context(|| format!("parsing {what} JSON"))
}

pub fn rule(arg: &str) -> Result<PatternRule> {
    Ok(PatternRule::from_json(&json_arg("rule", arg)?)?)
}

pub fn function(what: &str, arg: &str) -> Result<PreserverFunction> {
    Ok(PreserverFunction::from_json(&json_arg(what, arg)?)?)
}

pub fn domain(arg: Option<&str>) -> Result<Domain> {
    match arg {
        None => Ok(Domain::new(DomainKind::Disc, f64::INFINITY)?),
        Some(a) => serde_json::from_value(json_arg("domain", a)?).context("invalid domain"),
    }
}

pub fn matrix(arg: &str) -> Result<HermitianMatrix> {
    serde_json::from_value(json_arg("matrix", arg)?).context("invalid matrix")
}

pub fn real(name: &str, s: &str) -> Result<f64> {
    parse_real_str(s).ok_or_else(|| anyhow!("--{name}: cannot parse {s:?} as a number"))
}

pub fn complex(name: &str, s: &str) -> Result<Complex64> {
    if let Some(x) = parse_real_str(s) {
        return Ok(Complex64::new(x, 0.0));
    }
    Complex64::from_str(s.trim()).map_err(|_| anyhow!("--{name}: cannot parse {s:?} as a complex number"))
}

pub fn complex_list(name: &str, s: &str) -> Result<Vec<Complex64>> {
    let v: Vec<Complex64> = s.split(',').map(|p| complex(name, p)).collect::<Result<_>>()?;
    if v.is_empty() {
        bail!("--{name} is empty");
    }
    Ok(v)
}

pub fn required<'a, T>(name: &str, v: &'a Option<T>) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| anyhow!("missing --{name}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_numbers() {
        assert_eq!(real("c", "-11/20").unwrap(), -0.55);
        assert_eq!(complex("z", "0.3+0.4i").unwrap(), Complex64::new(0.3, 0.4));
        assert_eq!(complex("z", "-1/2").unwrap(), Complex64::new(-0.5, 0.0));
        assert_eq!(complex_list("v", "1,2i").unwrap().len(), 2);
        assert!(real("c", "abc").is_err());
    }

    #[test]
    fn default_domain_is_the_plane() {
        let d = domain(None).unwrap();
        assert!(!d.is_bounded() && d.kind() == DomainKind::Disc);
        let d = domain(Some(r#"{"kind":"open_pos","rho":1}"#)).unwrap();
        assert_eq!(d.kind(), DomainKind::OpenPos);
    }
}
