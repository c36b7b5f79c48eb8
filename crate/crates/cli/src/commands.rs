use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::{json, Map, Value};

use ptlab_core::density::{edge_density, four_profile_fast, t_inj_c4};
use ptlab_core::graph::{blowup, named_graph, parse_graph, random_graph, BlowupStructure, Graph};
use ptlab_core::iso::Class4;
use ptlab_core::property::{phi_value, WeightedDensityProperty, BUILTIN_NAME};
use ptlab_core::rational::to_fraction_string;

pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_graph(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Accepts the built-in name, inline JSON, or a path to a JSON property file.
pub fn load_property(spec: &str) -> Result<WeightedDensityProperty> {
    let trimmed = spec.trim();
    let text = if trimmed == BUILTIN_NAME || trimmed.starts_with('{') {
        trimmed.to_string()
    } else {
        fs::read_to_string(trimmed).with_context(|| format!("reading property file {trimmed}"))?
    };
    Ok(WeightedDensityProperty::from_spec(&text)?)
}

fn membership_fields(p: &WeightedDensityProperty, g: &Graph, out: &mut Map<String, Value>) -> Result<()> {
    let z = p.z_value(g);
    let member = p.is_member(g);
    out.insert("member".into(), json!(member));
    out.insert("z".into(), json!(to_fraction_string(&z)));
    out.insert("b".into(), json!(to_fraction_string(&p.b)));
    if !member {
        let gap = p.nonmember_gap(g)?;
        out.insert("gap".into(), json!(to_fraction_string(&gap.gap)));
        out.insert("gap_floor".into(), json!(to_fraction_string(&gap.bound)));
    }
    Ok(())
}

/// Census, densities and the membership verdict for the built-in property.
pub fn density_report(g: &Graph) -> Result<Value> {
    let profile = four_profile_fast(g);
    let p_values: Map<String, Value> = Class4::ALL
        .iter()
        .map(|&c| (c.name().to_string(), json!(to_fraction_string(&profile.density(c)))))
        .collect();
    let mut out = Map::new();
    out.insert("n".into(), json!(g.order()));
    out.insert("edges".into(), json!(g.edge_count()));
    out.insert("profile".into(), profile.to_json());
    out.insert("p".into(), Value::Object(p_values));
    out.insert("t_inj_K2".into(), json!(to_fraction_string(&edge_density(g))));
    out.insert("t_inj_C4".into(), json!(to_fraction_string(&t_inj_c4(g))));
    out.insert(
        "phi".into(),
        phi_value(g).map(|v| json!(to_fraction_string(&v))).unwrap_or(Value::Null),
    );
    out.insert("property".into(), json!(BUILTIN_NAME));
    membership_fields(&WeightedDensityProperty::quasirandomness_property(), g, &mut out)?;
    Ok(Value::Object(out))
}

pub fn member_report(g: &Graph, p: &WeightedDensityProperty) -> Result<Value> {
    let mut out = Map::new();
    out.insert("n".into(), json!(g.order()));
    out.insert("property".into(), p.to_json());
    membership_fields(p, g, &mut out)?;
    Ok(Value::Object(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Random,
    Blowup,
    Named,
}

impl std::str::FromStr for GenKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(GenKind::Random),
            "blowup" => Ok(GenKind::Blowup),
            "named" => Ok(GenKind::Named),
            other => bail!("unknown generator kind {other:?} (expected random, blowup or named)"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct GenArgs {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub base: Option<PathBuf>,
    pub name: Option<String>,
}

pub struct Generated {
    pub graph: Graph,
    pub structure: Option<BlowupStructure>,
}

pub fn generate(kind: GenKind, args: &GenArgs) -> Result<Generated> {
    match kind {
        GenKind::Random => {
            let n = args.n.context("random graphs need --n")?;
            Ok(Generated {
                graph: random_graph(n, args.seed.unwrap_or(0)),
                structure: None,
            })
        }
        GenKind::Named => {
            let name = args.name.as_deref().context("named graphs need a name")?;
            Ok(Generated {
                graph: named_graph(name)?,
                structure: None,
            })
        }
        GenKind::Blowup => {
            let base = read_graph(args.base.as_deref().context("blowups need --base")?)?;
            let k = args.k.context("blowups need --k")?;
            let (graph, structure) = blowup(&base, k)?;
            Ok(Generated {
                graph,
                structure: Some(structure),
            })
        }
    }
}

/// `graph.txt` gets the sidecar `graph.txt.parts.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".parts.json");
    PathBuf::from(name)
}

/// Writes the edge list to `out` (stdout when absent) and the part structure next to it.
pub fn write_generated(g: &Generated, out: Option<&Path>) -> Result<Option<String>> {
    let text = g.graph.to_edge_list();
    match out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            if let Some(s) = &g.structure {
                let side = sidecar_path(path);
                fs::write(&side, serde_json::to_string_pretty(s)?)
                    .with_context(|| format!("writing {}", side.display()))?;
            }
            Ok(None)
        }
        None if g.structure.is_some() => bail!("blowups need --out so the parts sidecar has a place to go"),
        None => Ok(Some(text)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ptlab_core::graph::path;

    #[test]
    fn p4_report() {
        let r = density_report(&path(4)).unwrap();
        assert_eq!(r["member"], json!(true));
        assert_eq!(r["z"], json!("1/4"));
        assert_eq!(r["phi"], json!("-1/8"));
        assert_eq!(r["p"]["P4"], json!("1/1"));
    }

    #[test]
    fn c4_report_has_gap() {
        let r = density_report(&named_graph("C4").unwrap()).unwrap();
        assert_eq!(r["member"], json!(false));
        assert_eq!(r["gap"], json!("3/16"));
    }

    #[test]
    fn tiny_graph_is_vacuous_member() {
        let r = density_report(&path(3)).unwrap();
        assert_eq!(r["member"], json!(true));
        assert!(r["profile"]["counts"].as_array().unwrap().iter().all(|c| c == &json!(0)));
    }

    #[test]
    fn property_specs() {
        assert_eq!(load_property("thm1.4").unwrap(), WeightedDensityProperty::quasirandomness_property());
        let inline = r#"{"h": 4, "weights": {"K4": "1/1"}, "b": "0/1"}"#;
        assert!(!load_property(inline).unwrap().is_member(&named_graph("K4").unwrap()));
        assert!(load_property("/nonexistent/property.json").is_err());
    }

    #[test]
    fn generator_arguments() {
        assert!(generate(GenKind::Random, &GenArgs::default()).is_err());
        let named = GenArgs {
            name: Some("C4".into()),
            ..Default::default()
        };
        let g = generate(GenKind::Named, &named).unwrap().graph;
        assert_eq!((g.order(), g.edge_count()), (4, 4));
        assert!("grid".parse::<GenKind>().is_err());
    }
}
