//! Parsing of command-line inputs into library objects.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use vdc_core::correlations::SampledFamily;
use vdc_core::exact::QuadIrrational;
use vdc_core::measures::AtomicTorusMeasure;
use vdc_core::numeric::e;
use vdc_core::posdef::CoefficientFamily;
use vdc_core::sequences::{RealSequenceSpec, SequenceSpec};
use vdc_core::{FiniteSet, IndexBox, MultiIndex};

pub type Res<T> = Result<T, String>;

pub fn core<T>(r: vdc_core::Result<T>) -> Res<T> {
    r.map_err(|e| e.to_string())
}

/// File contents when `arg` names a readable file, else `arg` itself.
pub fn text_or_file(arg: &str) -> Res<String> {
    let p = Path::new(arg);
    if p.is_file() {
        std::fs::read_to_string(p).map_err(|e| format!("cannot read {arg}: {e}"))
    } else {
        Ok(arg.to_string())
    }
}

pub fn json_arg(arg: &str) -> Res<Value> {
    let text = text_or_file(arg)?;
    serde_json::from_str(&text).map_err(|e| format!("invalid JSON in {arg:?}: {e}"))
}

pub fn index(s: &str) -> Res<MultiIndex> {
    core(s.trim().parse())
}

/// `"10,10;20,20"`: points separated by `;`.
pub fn index_list(s: &str) -> Res<Vec<MultiIndex>> {
    s.split(';').filter(|t| !t.trim().is_empty()).map(index).collect()
}

/// A set from a file in the text format, or inline points separated by `;`
/// or whitespace (`"1 2 4"`, `"1,0;0,1"`).
pub fn finite_set(arg: &str) -> Res<FiniteSet> {
    let p = Path::new(arg);
    if p.is_file() {
        return core(FiniteSet::parse_text(&text_or_file(arg)?));
    }
    let pts: Vec<MultiIndex> =
        arg.split(|c: char| c == ';' || c.is_whitespace()).filter(|t| !t.is_empty()).map(index).collect::<Res<_>>()?;
    let dim = pts.first().map(MultiIndex::dim).ok_or("empty set")?;
    core(FiniteSet::new(dim, pts))
}

/// Points of a set in the density order: Euclidean norm, then lexicographic.
pub fn density_order(set: &FiniteSet) -> Vec<MultiIndex> {
    let mut pts = set.points().to_vec();
    pts.sort_by(|a, b| a.norm_l2().total_cmp(&b.norm_l2()).then_with(|| a.cmp(b)));
    pts
}

pub fn sequence(arg: &str) -> Res<SequenceSpec> {
    let spec = core(SequenceSpec::parse_arg(arg))?;
    core(spec.validate())?;
    Ok(spec)
}

/// First `m` nonzero terms of a sequence.
pub fn sequence_terms(spec: &SequenceSpec, m: usize) -> Res<Vec<MultiIndex>> {
    let mut want = m;
    loop {
        let terms: Vec<MultiIndex> = core(spec.generate(want + 4))?.into_iter().filter(|t| !t.is_zero()).collect();
        if terms.len() >= m {
            return Ok(terms[..m].to_vec());
        }
        want = want * 2 + 8;
    }
}

/// Real sequence: JSON (inline or file), or the shorthand `c*n^k` / `c*n`.
pub fn real_sequence(arg: &str) -> Res<RealSequenceSpec> {
    let t = arg.trim();
    if let Some((c, rest)) = t.split_once("*n") {
        let power = match rest.strip_prefix('^') {
            Some(k) => k.parse().map_err(|_| format!("bad power in {t:?}"))?,
            None if rest.is_empty() => 1,
            None => return Err(format!("cannot parse {t:?}")),
        };
        let c: QuadIrrational = core(c.parse())?;
        return Ok(RealSequenceSpec::monomial(c, power));
    }
    core(RealSequenceSpec::parse_arg(&text_or_file(t)?))
}

pub fn coefficient_family(arg: &str) -> Res<CoefficientFamily> {
    core(CoefficientFamily::from_json(&json_arg(arg)?))
}

pub fn measure(arg: &str) -> Res<AtomicTorusMeasure> {
    core(AtomicTorusMeasure::from_json(&json_arg(arg)?))
}

fn need_seed(seed: Option<u64>, what: &str) -> Res<u64> {
    seed.ok_or_else(|| format!("{what} uses randomness: pass --seed"))
}

/// Families on `(0, N]`: a JSON file, or a named demo.
pub fn family(demo: Option<&str>, values: Option<&str>, n_max: &MultiIndex, seed: Option<u64>) -> Res<SampledFamily> {
    let domain = core(IndexBox::upto(n_max))?;
    if let Some(v) = values {
        return family_from_json(&json_arg(v)?, n_max);
    }
    let demo = demo.ok_or("give --demo or --values")?;
    let (name, param) = demo.split_once(':').unwrap_or((demo, ""));
    Ok(match name {
        "constant" => SampledFamily::from_fn(domain, |_| Complex64::new(1.0, 0.0)),
        "alternating" => SampledFamily::from_fn(domain, |p| {
            Complex64::new(if p.coords().iter().sum::<i64>() % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        }),
        "sparse" => SampledFamily::from_fn(domain, |p| Complex64::new(f64::from(u8::from(p.coords().iter().all(|&c| c == 1))), 0.0)),
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(need_seed(seed, "demo random")?);
            let values: Vec<Complex64> = domain.points().map(|_| e(rng.random::<f64>())).collect();
            core(SampledFamily::scalar(domain, values))?
        }
        "random-vector" => {
            let len: usize = param.parse().map_err(|_| "random-vector:<len> needs a length")?;
            let mut rng = ChaCha8Rng::seed_from_u64(need_seed(seed, "demo random-vector")?);
            let mut data = Vec::new();
            for _ in domain.points() {
                let v: Vec<f64> = loop {
                    let v: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if n > 1e-3 {
                        break v.into_iter().map(|x| x / n).collect();
                    }
                };
                data.extend(v);
            }
            core(SampledFamily::vector(domain, len, data))?
        }
        "weyl" => {
            if n_max.dim() != 1 {
                return Err("weyl demo families are one-dimensional".into());
            }
            let xs = core(real_sequence(param)?.fractional_parts(n_max.coords()[0].max(0) as usize))?;
            SampledFamily::from_phases(&xs)
        }
        other => return Err(format!("unknown demo family {other:?}")),
    })
}

/// `{"n": [..], "values": [[re, im], ...]}` or `{"n": [..], "vector_len": k, "data": [...]}`,
/// values in lexicographic order over `(0, n]`.
fn family_from_json(v: &Value, n_max: &MultiIndex) -> Res<SampledFamily> {
    let n: Vec<i64> = match v.get("n") {
        Some(x) => serde_json::from_value(x.clone()).map_err(|e| e.to_string())?,
        None => n_max.coords().to_vec(),
    };
    let n = MultiIndex::new(n);
    if !n_max.le_componentwise(&n) || n.dim() != n_max.dim() {
        return Err(format!("family on (0, {n}] does not cover (0, {n_max}]"));
    }
    let domain = core(IndexBox::upto(&n))?;
    if let Some(len) = v.get("vector_len").and_then(Value::as_u64) {
        let data: Vec<f64> = serde_json::from_value(v.get("data").cloned().ok_or("missing data")?).map_err(|e| e.to_string())?;
        return core(SampledFamily::vector(domain, len as usize, data));
    }
    let values: Vec<[f64; 2]> =
        serde_json::from_value(v.get("values").cloned().ok_or("missing values")?).map_err(|e| e.to_string())?;
    core(SampledFamily::scalar(domain, values.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()))
}

pub fn usize_list(s: &str) -> Res<Vec<usize>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| t.trim().parse().map_err(|_| format!("bad integer {t:?}"))).collect()
}
