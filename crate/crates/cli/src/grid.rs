//! Parsing of sweep lists such as `0:5:40`, `0.8,0.9,1` or `16,32:32:128`.

use mimo_slas::detectors::DetectorKind;

fn tidy(v: f64) -> f64 {
    let r = (v * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

/// Comma-separated items, each a number or an inclusive `start:step:stop`
/// range.
pub fn parse_reals(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        if item.is_empty() {
            return Err(format!("empty item in list '{s}'"));
        }
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [one] => out.push(parse_number(one)?),
            [start, step, stop] => {
                let (start, step, stop) = (parse_number(start)?, parse_number(step)?, parse_number(stop)?);
                if step <= 0.0 {
                    return Err(format!("step must be positive in '{item}'"));
                }
                if stop < start {
                    return Err(format!("range '{item}' is empty"));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                if count > 100_000 {
                    return Err(format!("range '{item}' has too many values"));
                }
                out.extend((0..count).map(|k| tidy(start + k as f64 * step)));
            }
            _ => return Err(format!("'{item}' is neither a number nor start:step:stop")),
        }
    }
    Ok(out)
}

pub fn parse_counts(s: &str) -> Result<Vec<usize>, String> {
    parse_reals(s)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(format!("{v} is not a non-negative integer"))
            }
        })
        .collect()
}

pub fn parse_detectors(s: &str) -> Result<Vec<DetectorKind>, String> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(DetectorKind::ALL.to_vec());
    }
    s.split(',').map(|d| d.trim().parse()).collect()
}

pub fn parse_las(s: &str) -> Result<Vec<bool>, String> {
    match s.trim() {
        "on" => Ok(vec![true]),
        "off" => Ok(vec![false]),
        "both" => Ok(vec![false, true]),
        other => Err(format!("unknown LAS mode '{other}' (expected on, off or both)")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_are_inclusive_and_clean() {
        assert_eq!(parse_reals("0:5:40").unwrap(), vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0]);
        let rho = parse_reals("0.8:0.05:1.2").unwrap();
        assert_eq!(rho.len(), 9);
        assert_eq!(rho[1], 0.85);
        assert_eq!(rho[8], 1.2);
        assert_eq!(parse_reals("0.7:0.1:1.3").unwrap()[6], 1.3);
    }

    #[test]
    fn mixed_items() {
        assert_eq!(parse_counts("1, 4:4:12").unwrap(), vec![1, 4, 8, 12]);
        assert!(parse_counts("2.5").is_err());
        assert!(parse_reals("1:0:3").is_err());
        assert!(parse_reals("3:1:1").is_err());
        assert!(parse_reals("").is_err());
        assert!(parse_reals("a").is_err());
    }

    #[test]
    fn detector_and_las_lists() {
        assert_eq!(parse_detectors("all").unwrap().len(), 3);
        assert_eq!(parse_detectors("zf,mf").unwrap(), vec![DetectorKind::Zf, DetectorKind::Mf]);
        assert!(parse_detectors("ml").is_err());
        assert_eq!(parse_las("both").unwrap(), vec![false, true]);
        assert!(parse_las("maybe").is_err());
    }
}
