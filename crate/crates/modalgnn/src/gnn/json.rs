//! JSON wire format for networks.
//!
//! ```json
//! {
//!   "scalar": "rational",
//!   "input_dim": 1,
//!   "layers": [
//!     {"agg": "mean",
//!      "C": [["1/2", "0"], ["0", "1"]],
//!      "A": [["4", "0"], ["0", "0"]],
//!      "b": ["-2", "0"],
//!      "activation": "trrelu"}
//!   ],
//!   "cls": {"kind": "threshold", "index": 1, "rel": ">", "c": "0"}
//! }
//! ```
//!
//! Matrix entries follow the scalar domain: `"num/den"` strings for
//! `rational`, plain numbers for `float64`, `{"p": …, "q": …}` objects for
//! `quad_ext`. `C` and `A` are indexed row-by-input-channel,
//! column-by-output-channel. The classifier's `index` and all channel
//! references inside builtin combination functions are 1-based. Builtin
//! layers replace the matrices with a `"builtin"` object whose `"kind"` is
//! `"channelwise"`, `"collapse_leaf_pipeline"`, or `"collapse_root_pipeline"`.

use super::{
    Activation, Aggregation, BuiltinComb, ChannelRecipe, Classifier, Comb, Gnn, GnnError, Layer,
    SimpleComb, ThresholdRel,
};
use crate::scalar::{format_rational, parse_rational, Scalar};
use serde_json::{json, Map, Value};

type Obj = Map<String, Value>;

fn bad(msg: impl Into<String>) -> GnnError {
    GnnError::BadJson(msg.into())
}

fn as_obj<'a>(v: &'a Value, what: &str) -> Result<&'a Obj, GnnError> {
    v.as_object().ok_or_else(|| bad(format!("{what} must be an object")))
}

fn as_arr<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, GnnError> {
    v.as_array().ok_or_else(|| bad(format!("{what} must be an array")))
}

fn field<'a>(o: &'a Obj, key: &str, what: &str) -> Result<&'a Value, GnnError> {
    o.get(key).ok_or_else(|| bad(format!("{what} is missing key `{key}`")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize, GnnError> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| bad(format!("{what} must be a non-negative integer")))
}

fn as_str<'a>(v: &'a Value, what: &str) -> Result<&'a str, GnnError> {
    v.as_str().ok_or_else(|| bad(format!("{what} must be a string")))
}

fn check_keys(o: &Obj, allowed: &[&str], what: &str) -> Result<(), GnnError> {
    for k in o.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(bad(format!("{what} has unknown key `{k}`")));
        }
    }
    Ok(())
}

fn scalar_from<S: Scalar>(v: &Value, what: &str) -> Result<S, GnnError> {
    S::from_json(v).map_err(|e| bad(format!("{what}: {e}")))
}

fn vec_from<S: Scalar>(v: &Value, what: &str) -> Result<Vec<S>, GnnError> {
    as_arr(v, what)?
        .iter()
        .map(|e| scalar_from(e, what))
        .collect()
}

fn mat_from<S: Scalar>(v: &Value, what: &str) -> Result<Vec<Vec<S>>, GnnError> {
    as_arr(v, what)?
        .iter()
        .map(|row| vec_from(row, what))
        .collect()
}

fn vec_to<S: Scalar>(xs: &[S]) -> Value {
    Value::Array(xs.iter().map(S::to_json).collect())
}

fn mat_to<S: Scalar>(m: &[Vec<S>]) -> Value {
    Value::Array(m.iter().map(|row| vec_to(row)).collect())
}

fn simple_comb_to<S: Scalar>(c: &SimpleComb<S>) -> Obj {
    let mut o = Map::new();
    o.insert("C".into(), mat_to(&c.c));
    o.insert("A".into(), mat_to(&c.a));
    o.insert("b".into(), vec_to(&c.b));
    o.insert("activation".into(), json!(c.activation.name()));
    o
}

fn simple_comb_from<S: Scalar>(o: &Obj, what: &str) -> Result<SimpleComb<S>, GnnError> {
    let act_name = as_str(field(o, "activation", what)?, "activation")?;
    let activation = Activation::from_name(act_name)
        .ok_or_else(|| bad(format!("unknown activation `{act_name}`")))?;
    Ok(SimpleComb {
        c: mat_from(field(o, "C", what)?, "C")?,
        a: mat_from(field(o, "A", what)?, "A")?,
        b: vec_from(field(o, "b", what)?, "b")?,
        activation,
    })
}

fn index_1based(v: &Value, what: &str) -> Result<usize, GnnError> {
    let idx = as_usize(v, what)?;
    if idx == 0 {
        return Err(bad(format!("{what} is 1-based, got 0")));
    }
    Ok(idx - 1)
}

fn recipe_to<S: Scalar>(r: &ChannelRecipe<S>) -> Value {
    match r {
        ChannelRecipe::Const(v) => json!({"op": "const", "value": v.to_json()}),
        ChannelRecipe::AffineOwn { src, scale, offset } => json!({
            "op": "affine_own",
            "src": src + 1,
            "scale": scale.to_json(),
            "offset": offset.to_json(),
        }),
        ChannelRecipe::AvgOwn { i, j } => json!({"op": "avg_own", "i": i + 1, "j": j + 1}),
        ChannelRecipe::ProjOwn { src } => json!({"op": "proj_own", "src": src + 1}),
        ChannelRecipe::ProjAgg { src } => json!({"op": "proj_agg", "src": src + 1}),
        ChannelRecipe::OracleOwn { src } => json!({"op": "oracle_own", "src": src + 1}),
    }
}

fn recipe_from<S: Scalar>(v: &Value) -> Result<ChannelRecipe<S>, GnnError> {
    let o = as_obj(v, "recipe")?;
    let op = as_str(field(o, "op", "recipe")?, "op")?;
    Ok(match op {
        "const" => {
            check_keys(o, &["op", "value"], "const recipe")?;
            ChannelRecipe::Const(scalar_from(field(o, "value", "const recipe")?, "value")?)
        }
        "affine_own" => {
            check_keys(o, &["op", "src", "scale", "offset"], "affine_own recipe")?;
            ChannelRecipe::AffineOwn {
                src: index_1based(field(o, "src", "affine_own recipe")?, "src")?,
                scale: scalar_from(field(o, "scale", "affine_own recipe")?, "scale")?,
                offset: scalar_from(field(o, "offset", "affine_own recipe")?, "offset")?,
            }
        }
        "avg_own" => {
            check_keys(o, &["op", "i", "j"], "avg_own recipe")?;
            ChannelRecipe::AvgOwn {
                i: index_1based(field(o, "i", "avg_own recipe")?, "i")?,
                j: index_1based(field(o, "j", "avg_own recipe")?, "j")?,
            }
        }
        "proj_own" => {
            check_keys(o, &["op", "src"], "proj_own recipe")?;
            ChannelRecipe::ProjOwn {
                src: index_1based(field(o, "src", "proj_own recipe")?, "src")?,
            }
        }
        "proj_agg" => {
            check_keys(o, &["op", "src"], "proj_agg recipe")?;
            ChannelRecipe::ProjAgg {
                src: index_1based(field(o, "src", "proj_agg recipe")?, "src")?,
            }
        }
        "oracle_own" => {
            check_keys(o, &["op", "src"], "oracle_own recipe")?;
            ChannelRecipe::OracleOwn {
                src: index_1based(field(o, "src", "oracle_own recipe")?, "src")?,
            }
        }
        other => return Err(bad(format!("unknown recipe op `{other}`"))),
    })
}

fn builtin_to<S: Scalar>(b: &BuiltinComb<S>) -> Value {
    match b {
        BuiltinComb::Channelwise { in_dim, recipes } => json!({
            "kind": "channelwise",
            "input_dim": in_dim,
            "recipes": recipes.iter().map(recipe_to).collect::<Vec<_>>(),
        }),
        BuiltinComb::CollapseLeafPipeline { combs, plus, minus } => json!({
            "kind": "collapse_leaf_pipeline",
            "combs": combs.iter().map(|c| Value::Object(simple_comb_to(c))).collect::<Vec<_>>(),
            "plus": mat_to(plus),
            "minus": mat_to(minus),
        }),
        BuiltinComb::CollapseRootPipeline { combs } => json!({
            "kind": "collapse_root_pipeline",
            "combs": combs.iter().map(|c| Value::Object(simple_comb_to(c))).collect::<Vec<_>>(),
        }),
    }
}

fn builtin_from<S: Scalar>(v: &Value) -> Result<BuiltinComb<S>, GnnError> {
    let o = as_obj(v, "builtin combination")?;
    let kind = as_str(field(o, "kind", "builtin combination")?, "kind")?;
    let combs_from = |o: &Obj| -> Result<Vec<SimpleComb<S>>, GnnError> {
        as_arr(field(o, "combs", "pipeline")?, "combs")?
            .iter()
            .map(|c| simple_comb_from(as_obj(c, "stacked layer")?, "stacked layer"))
            .collect()
    };
    Ok(match kind {
        "channelwise" => {
            check_keys(o, &["kind", "input_dim", "recipes"], "channelwise combination")?;
            let in_dim = as_usize(field(o, "input_dim", "channelwise combination")?, "input_dim")?;
            let recipes = as_arr(field(o, "recipes", "channelwise combination")?, "recipes")?
                .iter()
                .map(recipe_from)
                .collect::<Result<Vec<_>, _>>()?;
            BuiltinComb::Channelwise { in_dim, recipes }
        }
        "collapse_leaf_pipeline" => {
            check_keys(o, &["kind", "combs", "plus", "minus"], "leaf pipeline")?;
            BuiltinComb::CollapseLeafPipeline {
                combs: combs_from(o)?,
                plus: mat_from(field(o, "plus", "leaf pipeline")?, "plus")?,
                minus: mat_from(field(o, "minus", "leaf pipeline")?, "minus")?,
            }
        }
        "collapse_root_pipeline" => {
            check_keys(o, &["kind", "combs"], "root pipeline")?;
            BuiltinComb::CollapseRootPipeline { combs: combs_from(o)? }
        }
        other => return Err(bad(format!("unknown builtin kind `{other}`"))),
    })
}

fn layer_to<S: Scalar>(l: &Layer<S>) -> Value {
    match &l.comb {
        Comb::Simple(c) => {
            let mut o = simple_comb_to(c);
            o.insert("agg".into(), json!(l.agg.name()));
            Value::Object(o)
        }
        Comb::Builtin(b) => json!({
            "agg": l.agg.name(),
            "builtin": builtin_to(b),
        }),
    }
}

fn layer_from<S: Scalar>(v: &Value, idx: usize) -> Result<Layer<S>, GnnError> {
    let what = format!("layer {}", idx + 1);
    let o = as_obj(v, &what)?;
    let agg_name = as_str(field(o, "agg", &what)?, "agg")?;
    let agg = Aggregation::from_name(agg_name)
        .ok_or_else(|| bad(format!("unknown aggregation `{agg_name}`")))?;
    let comb = if o.contains_key("builtin") {
        check_keys(o, &["agg", "builtin"], &what)?;
        Comb::Builtin(builtin_from(field(o, "builtin", &what)?)?)
    } else {
        check_keys(o, &["agg", "C", "A", "b", "activation"], &what)?;
        Comb::Simple(simple_comb_from(o, &what)?)
    };
    Ok(Layer { agg, comb })
}

fn classifier_to(cls: &Classifier) -> Value {
    match cls {
        Classifier::Threshold { index, rel, c } => json!({
            "kind": "threshold",
            "index": index,
            "rel": rel.name(),
            "c": format_rational(c),
        }),
        Classifier::IrrationalityTest { index } => json!({
            "kind": "irrationality_test",
            "index": index,
        }),
    }
}

fn classifier_from(v: &Value) -> Result<Classifier, GnnError> {
    let o = as_obj(v, "cls")?;
    let kind = as_str(field(o, "kind", "cls")?, "kind")?;
    Ok(match kind {
        "threshold" => {
            check_keys(o, &["kind", "index", "rel", "c"], "threshold classifier")?;
            let rel = match as_str(field(o, "rel", "threshold classifier")?, "rel")? {
                ">=" => ThresholdRel::Geq,
                ">" => ThresholdRel::Gt,
                other => return Err(bad(format!("unknown threshold relation `{other}`"))),
            };
            let c_str = as_str(field(o, "c", "threshold classifier")?, "c")?;
            let c = parse_rational(c_str).map_err(|e| bad(e.to_string()))?;
            Classifier::Threshold {
                index: as_usize(field(o, "index", "threshold classifier")?, "index")?,
                rel,
                c,
            }
        }
        "irrationality_test" => {
            check_keys(o, &["kind", "index"], "irrationality-test classifier")?;
            Classifier::IrrationalityTest {
                index: as_usize(field(o, "index", "irrationality-test classifier")?, "index")?,
            }
        }
        other => return Err(bad(format!("unknown classifier kind `{other}`"))),
    })
}

impl<S: Scalar> Gnn<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "scalar": S::KIND.to_string(),
            "input_dim": self.input_dim,
            "layers": self.layers.iter().map(layer_to).collect::<Vec<_>>(),
            "cls": classifier_to(&self.cls),
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("network JSON is serializable")
    }

    pub fn from_json(v: &Value) -> Result<Self, GnnError> {
        let o = as_obj(v, "network")?;
        check_keys(o, &["scalar", "input_dim", "layers", "cls"], "network")?;
        let declared = as_str(field(o, "scalar", "network")?, "scalar")?;
        if declared != S::KIND.to_string() {
            return Err(GnnError::ScalarKindMismatch {
                declared: declared.to_string(),
                expected: S::KIND,
            });
        }
        let input_dim = as_usize(field(o, "input_dim", "network")?, "input_dim")?;
        let layers = as_arr(field(o, "layers", "network")?, "layers")?
            .iter()
            .enumerate()
            .map(|(i, l)| layer_from(l, i))
            .collect::<Result<Vec<_>, _>>()?;
        let cls = classifier_from(field(o, "cls", "network")?)?;
        let net = Gnn {
            input_dim,
            layers,
            cls,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn from_json_str(s: &str) -> Result<Self, GnnError> {
        let v: Value = serde_json::from_str(s).map_err(|e| bad(e.to_string()))?;
        Self::from_json(&v)
    }
}

/// Reads just the `"scalar"` declaration so callers can dispatch to the
/// right typed loader.
pub fn peek_scalar_kind(s: &str) -> Result<String, GnnError> {
    let v: Value = serde_json::from_str(s).map_err(|e| bad(e.to_string()))?;
    let o = as_obj(&v, "network")?;
    Ok(as_str(field(o, "scalar", "network")?, "scalar")?.to_string())
}
