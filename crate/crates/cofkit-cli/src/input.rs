//! Key-value stretch input: `a=..., b=..., c=..., d=..., system=...`, either
//! inline (comma separated) or as a file (one pair per line, `#` comments).
//! A `matrix=r11 r12 r13; r21 r22 r23; r31 r32 r33` entry overrides `a..d`.

use std::path::Path;

use cofkit::lattice::{CrystalSystem, MonoclinicParams};
use cofkit::linalg3::Mat3;
use cofkit::materials::preset;
use cofkit::{CofkitError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct StretchInput {
    pub source: String,
    pub system: CrystalSystem,
    pub params: MonoclinicParams,
}

fn parse_matrix(s: &str) -> Result<Mat3> {
    let rows: Vec<Vec<f64>> = s
        .split(';')
        .map(|r| {
            r.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|x| !x.is_empty())
                .map(|x| x.parse::<f64>().map_err(|_| CofkitError::InvalidInput(format!("bad matrix entry `{x}`"))))
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.len() != 3 || rows.iter().any(|r| r.len() != 3) {
        return Err(CofkitError::InvalidInput("matrix needs three rows of three entries".into()));
    }
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        m[i].copy_from_slice(&rows[i]);
    }
    Ok(Mat3::new(m))
}

/// Parses key-value text; `separator_newlines` selects file layout.
pub fn parse_params(text: &str, source: &str, file_layout: bool) -> Result<StretchInput> {
    let items: Vec<&str> = if file_layout {
        text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty()).collect()
    } else {
        text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
    };
    let (mut a, mut b, mut c, mut d) = (None, None, None, None);
    let mut system = CrystalSystem::Monoclinic;
    let mut matrix = None;
    for item in items {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CofkitError::InvalidInput(format!("`{item}` is not key=value")))?;
        let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
        let num = || value.parse::<f64>().map_err(|_| CofkitError::InvalidInput(format!("`{key}` is not a number: `{value}`")));
        match key.as_str() {
            "a" => a = Some(num()?),
            "b" => b = Some(num()?),
            "c" => c = Some(num()?),
            "d" => d = Some(num()?),
            "system" => {
                system = match value.to_ascii_lowercase().as_str() {
                    "monoclinic" => CrystalSystem::Monoclinic,
                    "orthorhombic" => CrystalSystem::Orthorhombic,
                    other => return Err(CofkitError::InvalidInput(format!("unknown system `{other}`"))),
                }
            }
            "matrix" => matrix = Some(parse_matrix(value)?),
            other => return Err(CofkitError::InvalidInput(format!("unknown key `{other}`"))),
        }
    }
    let params = if let Some(m) = matrix {
        MonoclinicParams::from_u1(&m)?
    } else {
        let missing = |n: &str| CofkitError::InvalidInput(format!("missing `{n}`"));
        let a = a.ok_or_else(|| missing("a"))?;
        let c = match (c, system) {
            (Some(c), _) => c,
            (None, CrystalSystem::Orthorhombic) => a,
            (None, _) => return Err(missing("c")),
        };
        MonoclinicParams::new(a, b.ok_or_else(|| missing("b"))?, c, d.ok_or_else(|| missing("d"))?)
    };
    if system == CrystalSystem::Orthorhombic && params.a != params.c {
        return Err(CofkitError::InvalidInput("orthorhombic input needs a = c".into()));
    }
    params.validate()?;
    Ok(StretchInput { source: source.to_string(), system, params })
}

/// Resolves `--preset` or `--params` (inline text or a file path).
pub fn resolve(preset_name: Option<&str>, params: Option<&str>) -> Result<StretchInput> {
    match (preset_name, params) {
        (Some(name), None) => {
            let p = preset(name)?;
            Ok(StretchInput { source: p.name.clone(), system: p.system, params: p.require_params()? })
        }
        (None, Some(spec)) => {
            let path = Path::new(spec);
            if !spec.contains('=') && path.is_file() {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CofkitError::InvalidInput(format!("cannot read {spec}: {e}")))?;
                parse_params(&text, spec, true)
            } else {
                parse_params(spec, "inline", false)
            }
        }
        (Some(_), Some(_)) => Err(CofkitError::InvalidInput("give either --preset or --params".into())),
        (None, None) => Err(CofkitError::InvalidInput("one of --preset or --params is required".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_and_file_layouts() {
        let a = parse_params("a=1.03, b=0.021, c=0.97, d=0.95", "inline", false).unwrap();
        let b = parse_params("# x\nsystem=monoclinic\na=1.03\nb=0.021\nc=0.97\nd=0.95\n", "f", true).unwrap();
        assert_eq!(a.params, b.params);
        let o = parse_params("system=orthorhombic,a=1.03,b=0.02,d=0.95", "inline", false).unwrap();
        assert_eq!(o.params.c, 1.03);
        let m = parse_params("matrix=1.03 0.021 0; 0.021 0.97 0; 0 0 0.95", "inline", false).unwrap();
        assert_eq!(m.params, a.params);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_params("a=1,b=0,c=1", "inline", false).is_err());
        assert!(parse_params("a=1,b=x,c=1,d=1", "inline", false).is_err());
        assert!(parse_params("a=1,b=2,c=1,d=1", "inline", false).is_err());
        assert!(resolve(None, None).is_err());
    }
}
