//! The JSON instance file format.
//!
//! ```json
//! {"schema_version": 1, "n": 2, "d": [3], "e": [1],
//!  "field": {"type": "Q"},
//!  "F": [[[[3,0,0],"1"], [[0,3,0],"1"], [[0,0,3],"1"]]],
//!  "G": [[[[1,0,0],"1"]]]}
//! ```
//!
//! Every polynomial is a list of `[[exponents...], "coeff"]` terms, with
//! coefficients written as integers or fractions `a/b`. Loading validates the
//! document by hand so that errors point at the offending value.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{parse_rational, FieldSpec};
use crate::instance::Instance;
use crate::poly::HomogPoly;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum FieldEntry {
    Q,
    Fp { p: u64 },
}

/// A term `[[exponents...], "coeff"]`.
pub type WireTerm = (Vec<u32>, String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub schema_version: u64,
    pub n: usize,
    pub d: Vec<u32>,
    pub e: Vec<u32>,
    pub field: FieldEntry,
    #[serde(rename = "F")]
    pub f: Vec<Vec<WireTerm>>,
    #[serde(rename = "G")]
    pub g: Vec<Vec<WireTerm>>,
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

fn as_uint(v: &Value, ptr: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| schema(ptr, "expected a nonnegative integer"))
}

fn as_array<'a>(v: &'a Value, ptr: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(ptr, "expected an array"))
}

fn degree_list(v: &Value, ptr: &str) -> Result<Vec<u32>> {
    as_array(v, ptr)?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let p = format!("{ptr}/{i}");
            let k = as_uint(x, &p)?;
            if k == 0 || k > u32::MAX as u64 {
                return Err(schema(p, "degrees must be positive"));
            }
            Ok(k as u32)
        })
        .collect()
}

fn poly_list(v: &Value, ptr: &str, degrees: &[u32], nvars: usize) -> Result<Vec<Vec<WireTerm>>> {
    let polys = as_array(v, ptr)?;
    if polys.len() != degrees.len() {
        return Err(schema(
            ptr,
            format!("{} polynomials listed but {} degrees declared", polys.len(), degrees.len()),
        ));
    }
    let mut out = Vec::with_capacity(polys.len());
    for (i, poly) in polys.iter().enumerate() {
        let pptr = format!("{ptr}/{i}");
        let terms = as_array(poly, &pptr)?;
        if terms.is_empty() {
            return Err(schema(pptr, "polynomial has no terms"));
        }
        let mut wire = Vec::with_capacity(terms.len());
        for (j, term) in terms.iter().enumerate() {
            let tptr = format!("{pptr}/{j}");
            let pair = as_array(term, &tptr)?;
            if pair.len() != 2 {
                return Err(schema(tptr, "a term is [[exponents...], \"coeff\"]"));
            }
            let eptr = format!("{tptr}/0");
            let exps = as_array(&pair[0], &eptr)?;
            if exps.len() != nvars {
                return Err(schema(eptr, format!("expected {nvars} exponents, found {}", exps.len())));
            }
            let exps: Vec<u32> = exps
                .iter()
                .enumerate()
                .map(|(k, x)| {
                    let xp = format!("{eptr}/{k}");
                    let v = as_uint(x, &xp)?;
                    u32::try_from(v).map_err(|_| schema(xp, "exponent too large"))
                })
                .collect::<Result<_>>()?;
            let total: u64 = exps.iter().map(|&x| x as u64).sum();
            if total != degrees[i] as u64 {
                return Err(schema(
                    eptr,
                    format!("monomial of degree {total} in a form of degree {}", degrees[i]),
                ));
            }
            let cptr = format!("{tptr}/1");
            let coeff = match &pair[1] {
                Value::String(s) => s.clone(),
                Value::Number(x) if x.is_i64() || x.is_u64() => x.to_string(),
                _ => return Err(schema(cptr, "coefficient must be a string or an integer")),
            };
            if parse_rational(&coeff).is_none() {
                return Err(schema(cptr, format!("cannot parse coefficient {coeff:?}")));
            }
            wire.push((exps, coeff));
        }
        out.push(wire);
    }
    Ok(out)
}

impl InstanceFile {
    /// Validate a parsed JSON document.
    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| schema("", "expected an object"))?;
        const KEYS: [&str; 7] = ["schema_version", "n", "d", "e", "field", "F", "G"];
        for key in obj.keys() {
            if !KEYS.contains(&key.as_str()) {
                return Err(schema(format!("/{key}"), "unknown key"));
            }
        }
        for key in KEYS {
            if !obj.contains_key(key) {
                return Err(schema(format!("/{key}"), "missing key"));
            }
        }
        let version = as_uint(&obj["schema_version"], "/schema_version")?;
        if version != SCHEMA_VERSION {
            return Err(schema("/schema_version", format!("unsupported version {version}")));
        }
        let n = as_uint(&obj["n"], "/n")? as usize;
        if n < 2 {
            return Err(schema("/n", "need n >= 2"));
        }
        let field = match obj["field"].get("type").and_then(Value::as_str) {
            Some("Q") => FieldEntry::Q,
            Some("Fp") => {
                let p = obj["field"]
                    .get("p")
                    .ok_or_else(|| schema("/field/p", "missing prime"))
                    .and_then(|x| as_uint(x, "/field/p"))?;
                FieldSpec::PrimeField(p)
                    .validate()
                    .map_err(|e| schema("/field/p", e.to_string()))?;
                FieldEntry::Fp { p }
            }
            _ => return Err(schema("/field/type", "expected \"Q\" or \"Fp\"")),
        };
        let d = degree_list(&obj["d"], "/d")?;
        let e = degree_list(&obj["e"], "/e")?;
        if d.len() + e.len() == 0 {
            return Err(schema("/d", "need at least one form"));
        }
        let f = poly_list(&obj["F"], "/F", &d, n + 1)?;
        let g = poly_list(&obj["G"], "/G", &e, n + 1)?;
        Ok(Self {
            schema_version: version,
            n,
            d,
            e,
            field,
            f,
            g,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| schema("", e.to_string()))?;
        Self::from_value(&v)
    }

    pub fn from_instance(inst: &Instance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            n: inst.n(),
            d: inst.d(),
            e: inst.e(),
            field: match inst.field() {
                FieldSpec::Rationals => FieldEntry::Q,
                FieldSpec::PrimeField(p) => FieldEntry::Fp { p },
            },
            f: inst.f().iter().map(HomogPoly::to_wire).collect(),
            g: inst.g().iter().map(HomogPoly::to_wire).collect(),
        }
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let field = match self.field {
            FieldEntry::Q => FieldSpec::Rationals,
            FieldEntry::Fp { p } => FieldSpec::PrimeField(p),
        };
        let build = |polys: &[Vec<WireTerm>], degs: &[u32], tag: &str| -> Result<Vec<HomogPoly>> {
            polys
                .iter()
                .zip(degs)
                .enumerate()
                .map(|(i, (w, &deg))| {
                    let p = HomogPoly::from_wire(self.n + 1, deg, w)
                        .map_err(|e| schema(format!("/{tag}/{i}"), e.to_string()))?;
                    if p.is_zero() {
                        return Err(schema(format!("/{tag}/{i}"), "polynomial is zero"));
                    }
                    Ok(p)
                })
                .collect()
        };
        let f = build(&self.f, &self.d, "F")?;
        let g = build(&self.g, &self.e, "G")?;
        let inst = Instance::new(self.n, f, g, field).map_err(|e| schema("", e.to_string()))?;
        for (i, p) in inst.f().iter().enumerate() {
            if p.is_zero() {
                return Err(schema(format!("/F/{i}"), "polynomial vanishes over the field"));
            }
        }
        for (j, p) in inst.g().iter().enumerate() {
            if p.is_zero() {
                return Err(schema(format!("/G/{j}"), "polynomial vanishes over the field"));
            }
        }
        Ok(inst)
    }

    /// Compact JSON with sorted terms and reduced coefficients.
    pub fn canonical_json(&self) -> Result<String> {
        let canon = Self::from_instance(&self.to_instance()?);
        Ok(serde_json::to_string(&canon).expect("serializable"))
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Parse and validate an instance file.
pub fn load_instance(text: &str) -> Result<Instance> {
    InstanceFile::parse(text)?.to_instance()
}

/// The pretty-printed file for an instance, ending in a newline.
pub fn instance_to_json(inst: &Instance) -> String {
    let mut s = InstanceFile::from_instance(inst).to_pretty_json();
    s.push('\n');
    s
}

/// Hex SHA-256 of the canonical JSON of an instance.
pub fn instance_digest(inst: &Instance) -> String {
    let canon = serde_json::to_string(&InstanceFile::from_instance(inst)).expect("serializable");
    let hash = Sha256::digest(canon.as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::reference;

    const ELLIPTIC: &str = r#"{"schema_version": 1, "n": 2, "d": [3], "e": [1],
        "field": {"type": "Q"},
        "F": [[[[3,0,0],"1"], [[0,3,0],"1"], [[0,0,3],"1"]]],
        "G": [[[[1,0,0],"1"]]]}"#;

    #[test]
    fn loads_reference_file() {
        let inst = load_instance(ELLIPTIC).unwrap();
        assert_eq!(inst, reference::elliptic_plus_line());
        assert_eq!(instance_digest(&inst), instance_digest(&reference::elliptic_plus_line()));
    }

    #[test]
    fn roundtrip() {
        for inst in [reference::fermat_quartic(), reference::elliptic_plus_three_lines()] {
            let text = instance_to_json(&inst);
            assert_eq!(load_instance(&text).unwrap(), inst);
        }
        let fp = Instance::random(2, &[3], &[1, 2], FieldSpec::PrimeField(101), 3).unwrap();
        assert_eq!(load_instance(&instance_to_json(&fp)).unwrap(), fp);
    }

    #[test]
    fn digest_ignores_layout_and_term_order() {
        let shuffled = r#"{"G": [[[[1,0,0],"2/2"]]], "F": [[[[0,0,3],1], [[3,0,0],"1"], [[0,3,0],"1"]]],
            "field": {"type": "Q"}, "e": [1], "d": [3], "n": 2, "schema_version": 1}"#;
        let a = load_instance(ELLIPTIC).unwrap();
        let b = load_instance(shuffled).unwrap();
        assert_eq!(instance_digest(&a), instance_digest(&b));
        assert_eq!(instance_digest(&a).len(), 64);
        assert_ne!(instance_digest(&a), instance_digest(&reference::fermat_quartic()));
    }

    fn pointer_of(text: &str) -> String {
        match load_instance(text) {
            Err(Error::Schema { pointer, .. }) => pointer,
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_pointers() {
        assert_eq!(pointer_of(&ELLIPTIC.replace("[[0,3,0],\"1\"]", "[[0,2,0],\"1\"]")), "/F/0/1/0");
        assert_eq!(pointer_of(&ELLIPTIC.replace("\"1\"]]]}", "\"x\"]]]}")), "/G/0/0/1");
        assert_eq!(pointer_of(&ELLIPTIC.replace("\"Q\"", "\"R\"")), "/field/type");
        assert_eq!(pointer_of(&ELLIPTIC.replace("\"schema_version\": 1", "\"schema_version\": 2")), "/schema_version");
        assert_eq!(pointer_of(&ELLIPTIC.replace("\"e\": [1]", "\"e\": [1, 1]")), "/G");
        assert_eq!(pointer_of(&ELLIPTIC.replace("[1,0,0]", "[1,0]")), "/G/0/0/0");
        assert_eq!(pointer_of(&ELLIPTIC.replace("{\"type\": \"Q\"}", "{\"type\": \"Fp\", \"p\": 100}")), "/field/p");
        assert_eq!(pointer_of("[1]"), "");
        assert_eq!(pointer_of(&ELLIPTIC.replace("\"n\": 2,", "\"n\": 2, \"x\": 0,")), "/x");
    }

    #[test]
    fn vanishing_modulo_p_is_rejected() {
        let text = ELLIPTIC.replace("{\"type\": \"Q\"}", "{\"type\": \"Fp\", \"p\": 5}").replace("[[[[1,0,0],\"1\"]]]", "[[[[1,0,0],\"5\"]]]");
        assert_eq!(pointer_of(&text), "/G/0");
    }
}
