//! Subcommand implementations. Each returns its report and whether the
//! checked property held.

use clap::Args;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use vdc_core::correlations::{discrepancy_star, gamma_tail, weyl_test, SampledFamily};
use vdc_core::divisibility::{appendix_construct, divisible_up_to, IntPolynomial};
use vdc_core::dynamics::{random_block_orbit, recurrence_test, vdc01_harness, RecurrenceMode, SetSpec, SystemSpec};
use vdc_core::inequalities::{
    check_box_vdc, check_generalized_vdc, check_group_vdc, check_spectral_ineq, quant_schedule, CyclicProduct, PdAssurance,
};
use vdc_core::measures::{bernoulli_spectral_measure, spectral_test, FourierMeasure, SpectralMode};
use vdc_core::posdef::{
    fejer_family, is_positive_definite, kmf_witness_from_sequence, verify_kmf_witness, witness_search, GridParams, PdMethod,
    PdParams, PdVerdict, SearchParams,
};
use vdc_core::sequences::{block_sequence, BlockMode, BlockSequenceParams};
use vdc_core::{FiniteSet, MultiIndex};

use crate::inputs::{self, core, Res};
use crate::report::Report;

type Outcome = Res<(Report, bool)>;

fn rows<T: serde::Serialize>(items: &[T]) -> Res<Vec<Value>> {
    items.iter().map(|x| serde_json::to_value(x).map_err(|e| e.to_string())).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Form {
    Box,
    Group,
    General,
    Quant,
    SpectralBound,
}

#[derive(Args, Debug)]
pub struct IneqArgs {
    #[arg(long, value_enum)]
    form: Form,
    /// Window `N`, e.g. `16,16`.
    #[arg(long = "N")]
    n: Option<String>,
    /// Fejér parameter `H` of the box form.
    #[arg(long = "H")]
    h: Option<String>,
    /// Demo family: constant, alternating, sparse, random, random-vector:<len>, weyl:<real sequence>.
    #[arg(long)]
    demo: Option<String>,
    /// Family values as JSON (inline or file).
    #[arg(long)]
    values: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Weight family as JSON (inline or file).
    #[arg(long)]
    weights: Option<String>,
    /// Use Fejér weights with this `H` instead of --weights.
    #[arg(long)]
    fejer: Option<String>,
    /// Skip the positive-definiteness check of the weights.
    #[arg(long)]
    trust_pd: bool,
    /// Group orders, e.g. `7,3`.
    #[arg(long)]
    orders: Option<String>,
    #[arg(long = "E")]
    e: Option<String>,
    #[arg(long = "D")]
    d: Option<String>,
    /// Windows for the quantitative form, e.g. `50;100;200`.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,
}

fn weights(a: &IneqArgs) -> Res<vdc_core::posdef::CoefficientFamily> {
    match (&a.weights, &a.fejer) {
        (Some(w), None) => inputs::coefficient_family(w),
        (None, Some(h)) => core(fejer_family(&inputs::index(h)?)),
        _ => Err("give exactly one of --weights or --fejer".into()),
    }
}

pub fn ineq(a: &IneqArgs) -> Outcome {
    let need_n = || a.n.as_deref().ok_or_else(|| "--N is required".to_string()).and_then(inputs::index);
    match a.form {
        Form::Box => {
            let n = need_n()?;
            let h = inputs::index(a.h.as_deref().ok_or("--H is required")?)?;
            let u = inputs::family(a.demo.as_deref(), a.values.as_deref(), &n, a.seed)?;
            let r = core(check_box_vdc(&u, &n, &h))?;
            let ok = r.holds;
            let table = rows(&r.terms)?;
            Ok((Report::new("ineq", &r)?.with_table(table), ok))
        }
        Form::Group => {
            let orders = inputs::usize_list(a.orders.as_deref().ok_or("--orders is required")?)?;
            let group = core(CyclicProduct::new(orders.iter().map(|&m| m as u64).collect()))?;
            let e = inputs::finite_set(a.e.as_deref().ok_or("--E is required")?)?;
            let d = inputs::finite_set(a.d.as_deref().ok_or("--D is required")?)?;
            let order = group.order();
            let u: Vec<Complex64> = match a.demo.as_deref().unwrap_or("constant") {
                "constant" => vec![Complex64::new(1.0, 0.0); order],
                "random" => {
                    let mut rng = ChaCha8Rng::seed_from_u64(a.seed.ok_or("demo random uses randomness: pass --seed")?);
                    (0..order).map(|_| vdc_core::numeric::e(rng.random::<f64>())).collect()
                }
                other => return Err(format!("unknown group demo {other:?} (constant, random)")),
            };
            let r = core(check_group_vdc(&group, &e, &d, &u))?;
            let ok = r.holds;
            Ok((Report::new("ineq", &r)?, ok))
        }
        Form::General => {
            let n = need_n()?;
            let u = inputs::family(a.demo.as_deref(), a.values.as_deref(), &n, a.seed)?;
            let w = weights(a)?;
            let assurance = if a.trust_pd { PdAssurance::Trusted } else { PdAssurance::Verify(PdParams { tol: 1e-6, ..PdParams::default() }) };
            let r = core(check_generalized_vdc(&u, &n, &w, &assurance))?;
            let ok = r.holds;
            let table = rows(&r.terms)?;
            Ok((Report::new("ineq", &r)?.with_table(table), ok))
        }
        Form::Quant => {
            let schedule = inputs::index_list(a.schedule.as_deref().ok_or("--schedule is required")?)?;
            let last = schedule.last().ok_or("empty schedule")?.clone();
            let n_max = MultiIndex::new(
                (0..last.dim()).map(|i| schedule.iter().map(|s| s.coords().get(i).copied().unwrap_or(0)).max().unwrap_or(0)).collect(),
            );
            let u = inputs::family(a.demo.as_deref(), a.values.as_deref(), &n_max, a.seed)?;
            let r = core(quant_schedule(&u, &weights(a)?, &schedule, a.tol))?;
            let table = rows(&r.rows)?;
            Ok((Report::new("ineq", &r)?.with_table(table), true))
        }
        Form::SpectralBound => {
            let n = need_n()?;
            let u = inputs::family(a.demo.as_deref(), a.values.as_deref(), &n, a.seed)?;
            let r = core(check_spectral_ineq(&u, n.coords()[0], &weights(a)?))?;
            let ok = r.holds;
            Ok((Report::new("ineq", &r)?, ok))
        }
    }
}

#[derive(Args, Debug)]
pub struct WitnessArgs {
    /// Search for a witness supported on ±D.
    #[arg(long)]
    search: bool,
    /// Verify the witness in this JSON file (or inline JSON).
    #[arg(long)]
    verify: Option<String>,
    /// Build P_{q,N} from this sequence.
    #[arg(long)]
    from_seq: Option<String>,
    /// Certify positive-definiteness of the family in this JSON (or `fejer:H`).
    #[arg(long)]
    pd: Option<String>,
    /// Frequency set D.
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    /// Grid points per coordinate for the search.
    #[arg(long, default_value_t = 1000)]
    grid: usize,
    #[arg(long, default_value_t = 1)]
    q: u32,
    #[arg(long = "N", default_value_t = 1000)]
    n: usize,
    /// Points at which to evaluate the polynomial, e.g. `0.5;0.25`.
    #[arg(long)]
    at: Option<String>,
    #[arg(long, default_value = "grid")]
    method: String,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 32)]
    cmax: usize,
    /// Also write the produced family as JSON here.
    #[arg(long)]
    emit: Option<std::path::PathBuf>,
}

fn evaluations(p: &vdc_core::posdef::CoefficientFamily, at: Option<&str>) -> Res<Vec<Value>> {
    let Some(at) = at else { return Ok(Vec::new()) };
    at.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let x: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad point {s:?}"))).collect::<Res<_>>()?;
            if x.len() != p.dim() {
                return Err(format!("point {s:?} has the wrong dimension"));
            }
            let v = p.evaluate(&x);
            Ok(json!({"x": x, "re": v.re, "im": v.im, "abs": v.norm()}))
        })
        .collect()
}

fn emit(path: &Option<std::path::PathBuf>, p: &vdc_core::posdef::CoefficientFamily) -> Res<()> {
    if let Some(path) = path {
        let text = serde_json::to_string_pretty(&p.to_json()).map_err(|e| e.to_string())?;
        std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

pub fn witness(a: &WitnessArgs) -> Outcome {
    let modes = usize::from(a.search) + usize::from(a.verify.is_some()) + usize::from(a.from_seq.is_some()) + usize::from(a.pd.is_some());
    if modes != 1 {
        return Err("give exactly one of --search, --verify, --from-seq, --pd".into());
    }
    let grid = GridParams::default();
    if a.search {
        let d = inputs::finite_set(a.set.as_deref().ok_or("--set is required")?)?;
        let mut params = SearchParams::new(a.eps.ok_or("--eps is required")?, a.grid);
        params.certify = GridParams::for_dim(d.dim());
        let out = core(witness_search(&d, &params))?;
        if let vdc_core::posdef::SearchOutcome::Found { witness, .. } = &out {
            emit(&a.emit, witness)?;
        }
        return Ok((Report::new("witness", &out)?, true));
    }
    if let Some(v) = &a.verify {
        let p = inputs::coefficient_family(v)?;
        let d = inputs::finite_set(a.set.as_deref().ok_or("--set is required")?)?;
        let r = core(verify_kmf_witness(&p, &d, a.eps.ok_or("--eps is required")?, &GridParams::for_dim(p.dim())))?;
        let ok = r.is_witness;
        return Ok((Report::new("witness", &r)?, ok));
    }
    if let Some(s) = &a.from_seq {
        let spec = inputs::sequence(s)?;
        let p = core(kmf_witness_from_sequence(&spec, a.q, a.n))?;
        emit(&a.emit, &p)?;
        let s = p.sum();
        let mut body = json!({
            "q": a.q,
            "n": a.n,
            "dim": p.dim(),
            "entries": p.len(),
            "p_at_zero": vdc_core::exact::format_rational(&s.re),
            "hermitian": p.is_hermitian(),
            "a0": vdc_core::posdef::exact_to_c64(&p.a0()).re,
            "evaluations": evaluations(&p, a.at.as_deref())?,
        });
        let mut ok = true;
        if let Some(eps) = a.eps {
            let support: Vec<MultiIndex> = p.support().into_iter().filter(|h| !h.is_zero()).collect();
            let d = core(FiniteSet::new(p.dim(), support))?;
            let r = core(verify_kmf_witness(&p, &d, eps, &grid))?;
            ok = r.is_witness;
            body["check"] = serde_json::to_value(&r).map_err(|e| e.to_string())?;
        }
        return Ok((Report::new("witness", body)?, ok));
    }
    let spec = a.pd.as_deref().expect("one mode");
    let fam = match spec.strip_prefix("fejer:") {
        Some(h) => core(fejer_family(&inputs::index(h)?))?,
        None => inputs::coefficient_family(spec)?,
    };
    let method: PdMethod = core(a.method.parse())?;
    let params = PdParams { cmax: a.cmax, tol: a.tol, grid: GridParams::for_dim(fam.dim()), ..PdParams::default() };
    let cert = core(is_positive_definite(&fam, method, &params))?;
    let ok = cert.verdict != PdVerdict::Not;
    Ok((Report::new("witness", &cert)?, ok))
}

#[derive(Args, Debug)]
pub struct SpectralArgs {
    #[arg(long)]
    mode: String,
    /// Atomic measure JSON (inline or file).
    #[arg(long)]
    measure: Option<String>,
    /// Bernoulli spectral measure `k:mass` instead of an atomic one.
    #[arg(long)]
    bernoulli: Option<String>,
    /// Frequency set D (text file or inline), taken in density order.
    #[arg(long)]
    set: Option<String>,
    /// Or a sequence for D.
    #[arg(long)]
    seq: Option<String>,
    /// Window length (default: all of --set).
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,
}

pub fn spectral(a: &SpectralArgs) -> Outcome {
    let mode: SpectralMode = core(a.mode.parse())?;
    let atomic;
    let bern;
    let sigma: &dyn FourierMeasure = match (&a.measure, &a.bernoulli) {
        (Some(m), None) => {
            atomic = inputs::measure(m)?;
            &atomic
        }
        (None, Some(b)) => {
            let (k, mass) = b.split_once(':').ok_or("--bernoulli takes k:mass")?;
            let k: u64 = k.parse().map_err(|_| format!("bad k {k:?}"))?;
            bern = core(bernoulli_spectral_measure(k, parse_fraction(mass)?))?;
            &bern
        }
        _ => return Err("give exactly one of --measure or --bernoulli".into()),
    };
    let d: Vec<MultiIndex> = match (&a.set, &a.seq) {
        (Some(s), None) => inputs::density_order(&inputs::finite_set(s)?),
        (None, Some(s)) => inputs::sequence_terms(&inputs::sequence(s)?, a.m.ok_or("--M is required with --seq")?)?,
        _ => return Err("give exactly one of --set or --seq".into()),
    };
    let m = a.m.unwrap_or(d.len());
    let r = core(spectral_test(sigma, &d, m, mode, a.tol))?;
    let table: Vec<Value> = r.coefficients.iter().map(|(d, [re, im])| json!({"d": d, "re": re, "im": im, "abs": re.hypot(*im)})).collect();
    Ok((Report::new("spectral", &r)?.with_table(table), true))
}

/// A float or a fraction `p/q`.
fn parse_fraction(s: &str) -> Res<f64> {
    let bad = || format!("bad number {s:?}");
    match s.split_once('/') {
        Some((p, q)) => Ok(p.trim().parse::<f64>().map_err(|_| bad())? / q.trim().parse::<f64>().map_err(|_| bad())?),
        None => s.trim().parse().map_err(|_| bad()),
    }
}

#[derive(Args, Debug)]
pub struct DivisArgs {
    /// Polynomials as ascending coefficients, e.g. `2,0,1,1`; write
    /// `--polys=-2,0,1` when the first coefficient is negative.
    #[arg(long, num_args = 1..)]
    polys: Vec<String>,
    /// Check every prime power up to this bound.
    #[arg(long)]
    upto: Option<u64>,
    /// Build n with d | a p(n) + b q(n) for the fixed pair, given `a,b,d`.
    #[arg(long, allow_hyphen_values = true)]
    appendix: Option<String>,
}

pub fn divis(a: &DivisArgs) -> Outcome {
    if let Some(spec) = &a.appendix {
        let parts: Vec<i64> =
            spec.split(',').map(|t| t.trim().parse().map_err(|_| format!("bad integer {t:?}"))).collect::<Res<_>>()?;
        let [x, y, d] = parts[..] else { return Err("--appendix takes a,b,d".into()) };
        if d < 1 {
            return Err("d must be positive".into());
        }
        let r = core(appendix_construct(x, y, d as u64))?;
        return Ok((Report::new("divis", &r)?, true));
    }
    if a.polys.is_empty() {
        return Err("give --polys or --appendix".into());
    }
    let ps: Vec<IntPolynomial> = a.polys.iter().map(|p| core(p.parse())).collect::<Res<_>>()?;
    let r = core(divisible_up_to(&ps, a.upto.ok_or("--upto is required")?))?;
    let ok = r.all_pass;
    let table: Vec<Value> = r.witnesses.iter().map(|(q, n)| json!({"prime_power": q, "witness": n})).collect();
    Ok((Report::new("divis", &r)?.with_table(table), ok))
}

#[derive(Args, Debug)]
pub struct RecurArgs {
    /// `rotation:<alpha>`, `cyclic:<m>`, `bernoulli:<k>:<mass>`, or JSON.
    #[arg(long)]
    system: String,
    /// `a:b` interval, `0,3` residues, `cylinder`, `|`-separated product factors, or JSON.
    #[arg(long)]
    set: String,
    /// Shift sequence D.
    #[arg(long)]
    seq: Option<String>,
    #[arg(long, default_value = "plain")]
    mode: String,
    #[arg(long = "M", default_value_t = 1000)]
    m: usize,
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    /// Build a random block orbit instead of scanning correlations.
    #[arg(long)]
    orbit: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "N", default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value = "1")]
    lags: String,
}

pub fn recur(a: &RecurArgs) -> Outcome {
    let sys = core(SystemSpec::parse_arg(&a.system))?;
    let set = core(SetSpec::parse_for(&sys, &a.set))?;
    if a.orbit {
        let seed = a.seed.ok_or("random block orbits use randomness: pass --seed")?;
        let lags = inputs::usize_list(&a.lags)?;
        let orbit = core(random_block_orbit(&sys, &set, seed, a.n, &lags))?;
        let mut body = serde_json::to_value(&orbit).map_err(|e| e.to_string())?;
        let mut ok = true;
        if let Some(s) = &a.seq {
            let ds: Vec<usize> = inputs::sequence_terms(&inputs::sequence(s)?, a.m)?
                .iter()
                .filter_map(|d| usize::try_from(d.coords()[0]).ok())
                .collect();
            let h = core(vdc01_harness(&orbit.u, &ds))?;
            ok = h.first_positive.is_some() || h.density == 0.0;
            body["vdc01"] = serde_json::to_value(&h).map_err(|e| e.to_string())?;
        }
        let table = rows(&orbit.lags)?;
        return Ok((Report::new("recur", body)?.with_table(table), ok));
    }
    let mode: RecurrenceMode = core(a.mode.parse())?;
    let ds: Vec<i64> = inputs::sequence_terms(&inputs::sequence(a.seq.as_deref().ok_or("--seq is required")?)?, a.m)?
        .iter()
        .map(|d| d.coords()[0])
        .collect();
    let r = core(recurrence_test(&sys, &set, &ds, mode, a.eps))?;
    let ok = r.window_holds;
    let table: Vec<Value> = ds.iter().zip(&r.values).map(|(d, v)| json!({"d": d, "correlation": v})).collect();
    Ok((Report::new("recur", &r)?.with_table(table), ok))
}

#[derive(Args, Debug)]
pub struct UdtestArgs {
    /// Real sequence: `c*n^k` shorthand or JSON.
    #[arg(long)]
    seq: String,
    #[arg(long = "N", default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    kmax: u32,
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,
    /// Also compute the star discrepancy.
    #[arg(long)]
    discrepancy: bool,
    /// Correlation tail of u_n = e(x_n) along this shift sequence.
    #[arg(long)]
    tail: Option<String>,
    #[arg(long = "M", default_value_t = 100)]
    m: usize,
}

pub fn udtest(a: &UdtestArgs) -> Outcome {
    let xs = core(inputs::real_sequence(&a.seq)?.fractional_parts(a.n))?;
    let w = core(weyl_test(&xs, a.kmax, a.tol))?;
    let mut body = json!({"weyl": serde_json::to_value(&w).map_err(|e| e.to_string())?});
    if a.discrepancy {
        body["star_discrepancy"] = json!(core(discrepancy_star(&xs))?);
    }
    if let Some(t) = &a.tail {
        let ds = inputs::sequence_terms(&inputs::sequence(t)?, a.m)?;
        let reach = ds.iter().map(|d| d.coords()[0].unsigned_abs() as usize).max().unwrap_or(0);
        if reach >= a.n {
            return Err("shifts reach beyond the window".into());
        }
        let xs_long = core(inputs::real_sequence(&a.seq)?.fractional_parts(a.n + reach))?;
        let u = SampledFamily::from_phases(&xs_long);
        let g = core(gamma_tail(&u, &ds, a.m, &MultiIndex::scalar(a.n as i64)))?;
        body["gamma_tail"] = serde_json::to_value(&g).map_err(|e| e.to_string())?;
    }
    let table = rows(&w.rows)?;
    Ok((Report::new("udtest", body)?.with_table(table), true))
}

#[derive(Args, Debug)]
pub struct SeqArgs {
    /// Integer sequence: a name, JSON, or a JSON file.
    #[arg(long)]
    seq: Option<String>,
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Random block sequence for this probability measure (JSON).
    #[arg(long)]
    block_measure: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "N", default_value_t = 10_000)]
    n: u64,
    /// Block mode: `values`, or `plain:<h>` for e(h theta_m) repeated.
    #[arg(long, default_value = "values")]
    mode: String,
    /// Empirical correlations at lags 1..=kmax.
    #[arg(long, default_value_t = 1)]
    kmax: i64,
}

pub fn seq(a: &SeqArgs) -> Outcome {
    if let Some(m) = &a.block_measure {
        let measure = inputs::measure(m)?;
        let seed = a.seed.ok_or("block sequences use randomness: pass --seed")?;
        let mode = match a.mode.as_str() {
            "values" => BlockMode::Values,
            other => match other.strip_prefix("plain:") {
                Some(h) => BlockMode::Plain { h: h.parse().map_err(|_| format!("bad frequency {h:?}"))? },
                None => return Err(format!("unknown block mode {other:?}")),
            },
        };
        let params = BlockSequenceParams { measure: measure.clone(), seed, mode };
        let ys = core(block_sequence(&params, a.n))?;
        let u = SampledFamily::from_sequence(ys.clone());
        let n = a.n as f64;
        let mean = ys.iter().copied().collect::<vdc_core::numeric::ComplexSum>().value() / n;
        let mut lags = Vec::new();
        for k in 1..=a.kmax.max(0) {
            let g = core(vdc_core::correlations::correlation_gamma(&u, &MultiIndex::scalar(a.n as i64), &MultiIndex::scalar(k)))? / n;
            let target = core(measure.fourier_coefficient(&MultiIndex::scalar(k)))?;
            lags.push(json!({"lag": k, "re": g.re, "im": g.im, "target_re": target.re, "target_im": target.im, "error": (g - target).norm()}));
        }
        let body = json!({
            "n": a.n,
            "seed": seed,
            "mode": a.mode,
            "mean": {"re": mean.re, "im": mean.im},
            "mass_at_zero": measure.mass_at_zero(),
            "lags": lags.clone(),
        });
        return Ok((Report::new("seq", body)?.with_table(lags), true));
    }
    let spec = inputs::sequence(a.seq.as_deref().ok_or("give --seq or --block-measure")?)?;
    let terms = core(spec.generate(a.count))?;
    let table: Vec<Value> = terms.iter().enumerate().map(|(i, t)| json!({"m": i + 1, "term": t})).collect();
    Ok((Report::new("seq", json!({"dim": spec.dim(), "count": a.count, "terms": terms}))?.with_table(table), true))
}
