use std::path::PathBuf;

use anyhow::Result;
use openbaker::classical::{escape_rate_mc, finite_time_repeller, transition_matrix};
use openbaker::maps::{MapFamily, Opening, QuantumMap, TorusHilbert};
use openbaker::phasespace::{autocorrelation, h_distribution, husimi, GridSpec, HusimiSide};
use openbaker::spectral::{resonances, weyl_fit, ResonanceSet, SpectralOptions};
use openbaker::Error;
use serde_json::{json, Map, Value};

use crate::output::{num, stage_grid, Csv, Staged};
use crate::{Command, GridArgs, HusimiKind, MapArgs, SpectralArgs};

pub fn run(command: Command) -> Result<Vec<PathBuf>> {
    match command {
        Command::Spectrum { map, spectral, out } => spectrum(&map, &spectral, out.out),
        Command::Husimi {
            map,
            spectral,
            index,
            kind,
            grid,
            out,
        } => husimi_cmd(&map, &spectral, index, kind, &grid, out.out),
        Command::Autocorr { map, n, grid, out } => autocorr(&map, n, &grid, out.out),
        Command::Repeller {
            family,
            l,
            t_back,
            t_fwd,
            out,
        } => repeller(family, l, t_back, t_fwd, out.out),
        Command::Tau {
            n,
            l,
            min_modulus,
            spectral,
            out,
        } => tau(n, &l, min_modulus, &spectral, out.out),
        Command::Weyl {
            family,
            ns,
            l,
            closed,
            nu_c,
            spectral,
            out,
        } => weyl(family, &ns, l, closed, nu_c, &spectral, out.out),
        Command::Entropy { l, out } => entropy(l, out.out),
        Command::Escape {
            family,
            l,
            samples,
            steps,
            seed,
            out,
        } => escape(family, l, samples, steps, seed, out.out),
    }
}

/// Map opening from the flags: `--closed` wins, a dyadic map without `--l`
/// is closed, and the triadic opening has no depth.
fn resolve_opening(family: MapFamily, l: Option<u32>, closed: bool) -> Result<Option<Opening>, Error> {
    match (family, l, closed) {
        (_, Some(_), true) => Err(Error::Config("--closed conflicts with --l".into())),
        (_, None, true) => Ok(None),
        (MapFamily::Dyadic, l, false) => Ok(l.map(|depth| Opening::Dyadic { depth })),
        (MapFamily::Triadic, Some(_), false) => Err(Error::Config("--l applies to the dyadic family only".into())),
        (MapFamily::Triadic, None, false) => Ok(Some(Opening::Triadic)),
    }
}

/// Opening required by the classical commands, which have no closed variant.
fn classical_opening(family: MapFamily, l: Option<u32>) -> Result<Opening, Error> {
    let opening = match (family, l) {
        (MapFamily::Dyadic, Some(depth)) => Opening::Dyadic { depth },
        (MapFamily::Dyadic, None) => return Err(Error::Config("the dyadic family needs --l".into())),
        (MapFamily::Triadic, None) => Opening::Triadic,
        (MapFamily::Triadic, Some(_)) => return Err(Error::Config("--l applies to the dyadic family only".into())),
    };
    opening.validate()?;
    Ok(opening)
}

fn build_map(family: MapFamily, n: usize, l: Option<u32>, closed: bool) -> Result<QuantumMap, Error> {
    let opening = resolve_opening(family, l, closed)?;
    QuantumMap::baker(TorusHilbert::new(n)?, family, opening)
}

fn options(s: &SpectralArgs) -> SpectralOptions {
    SpectralOptions {
        null_threshold: s.null_threshold,
        max_condition: s.max_condition,
    }
}

fn base_meta(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m
}

fn map_meta(meta: &mut Map<String, Value>, map: &QuantumMap) {
    meta.insert("family".into(), json!(map.family().name()));
    meta.insert("N".into(), json!(map.hilbert().dim()));
    let l = match map.opening() {
        Some(Opening::Dyadic { depth }) => json!(depth),
        _ => Value::Null,
    };
    meta.insert("l".into(), l);
    meta.insert("opening".into(), json!(map.opening().map(|o| o.to_string())));
}

fn spectral_meta(meta: &mut Map<String, Value>, set: &ResonanceSet, s: &SpectralArgs) {
    meta.insert("null_threshold".into(), json!(set.null_threshold()));
    meta.insert("max_condition".into(), json!(s.max_condition));
    meta.insert("nullDim".into(), json!(set.null_dim()));
    meta.insert("retained".into(), json!(set.len()));
    // non-finite condition numbers are written as null
    meta.insert("vCondition".into(), json!(set.v_condition()));
    meta.insert("escape_trace".into(), json!(set.source().escape_trace));
    let flagged: Vec<usize> = set
        .resonances()
        .iter()
        .enumerate()
        .filter(|(_, r)| r.flagged())
        .map(|(i, _)| i)
        .collect();
    meta.insert("flagged".into(), json!(flagged));
}

fn spectrum(m: &MapArgs, s: &SpectralArgs, out: PathBuf) -> Result<Vec<PathBuf>> {
    let map = build_map(m.family, m.n, m.l, m.closed)?;
    let set = resonances(&map, &options(s))?;
    let mut csv = Csv::new(&["index", "re", "im", "modulus", "gamma", "tau", "parity", "overlap_abs"]);
    for (i, r) in set.resonances().iter().enumerate() {
        csv.row(&[
            i.to_string(),
            num(r.lambda.re),
            num(r.lambda.im),
            num(r.modulus),
            num(r.gamma),
            num(r.tau),
            r.parity.as_str().to_string(),
            num(r.overlap.norm()),
        ]);
    }
    let mut meta = base_meta("spectrum");
    map_meta(&mut meta, &map);
    spectral_meta(&mut meta, &set, s);
    let mut staged = Staged::default();
    staged.add("spectrum.csv", csv.into_bytes());
    staged.add_json("meta.json", &Value::Object(meta))?;
    staged.commit(&out)
}

fn grid_spec(g: &GridArgs) -> Result<GridSpec, Error> {
    let spec = GridSpec { nq: g.nq, np: g.np };
    spec.validate()?;
    Ok(spec)
}

fn grid_meta(meta: &mut Map<String, Value>, g: &GridArgs) {
    meta.insert("nq".into(), json!(g.nq));
    meta.insert("np".into(), json!(g.np));
    meta.insert("format".into(), json!(format!("{:?}", g.format).to_lowercase()));
}

fn husimi_cmd(
    m: &MapArgs,
    s: &SpectralArgs,
    index: usize,
    kind: HusimiKind,
    g: &GridArgs,
    out: PathBuf,
) -> Result<Vec<PathBuf>> {
    let spec = grid_spec(g)?;
    let map = build_map(m.family, m.n, m.l, m.closed)?;
    let set = resonances(&map, &options(s))?;
    let r = set.resonances().get(index).ok_or_else(|| {
        Error::Config(format!("resonance index {index} out of range; {} retained", set.len()))
    })?;
    if r.near_defective() {
        return Err(Error::NearDefective(format!(
            "resonance {index} has |⟨ψL|ψR⟩| = {:.3e}",
            r.overlap.norm()
        ))
        .into());
    }
    let h = map.hilbert();
    let (grid, stem) = match kind {
        HusimiKind::Right => (husimi(h, &r.right, spec, HusimiSide::Right)?, "husimi_right"),
        HusimiKind::Left => (husimi(h, &r.left, spec, HusimiSide::Left)?, "husimi_left"),
        HusimiKind::H => (h_distribution(r, h, spec)?, "h"),
    };
    let stem = format!("{stem}_{index}");
    let mut staged = Staged::default();
    let mut meta = base_meta("husimi");
    map_meta(&mut meta, &map);
    spectral_meta(&mut meta, &set, s);
    grid_meta(&mut meta, g);
    meta.insert("index".into(), json!(index));
    meta.insert("kind".into(), json!(format!("{kind:?}").to_lowercase()));
    meta.insert("lambda".into(), json!([r.lambda.re, r.lambda.im]));
    meta.insert("grid".into(), stage_grid(&mut staged, &stem, &grid, g.format));
    staged.add_json("meta.json", &Value::Object(meta))?;
    staged.commit(&out)
}

fn autocorr(m: &MapArgs, n: u32, g: &GridArgs, out: PathBuf) -> Result<Vec<PathBuf>> {
    let spec = grid_spec(g)?;
    let map = build_map(m.family, m.n, m.l, m.closed)?;
    let grid = autocorrelation(&map, n, spec)?;
    let mut staged = Staged::default();
    let mut meta = base_meta("autocorr");
    map_meta(&mut meta, &map);
    grid_meta(&mut meta, g);
    meta.insert("n".into(), json!(n));
    meta.insert("grid".into(), stage_grid(&mut staged, &format!("autocorr_{n}"), &grid, g.format));
    staged.add_json("meta.json", &Value::Object(meta))?;
    staged.commit(&out)
}

fn repeller(family: MapFamily, l: Option<u32>, t_back: u32, t_fwd: u32, out: PathBuf) -> Result<Vec<PathBuf>> {
    let opening = classical_opening(family, l)?;
    let rep = finite_time_repeller(t_back, t_fwd, opening)?;
    let rects: Vec<Value> = rep
        .rectangles
        .iter()
        .map(|r| json!({ "q_lo": r.q_lo, "q_hi": r.q_hi, "p_lo": r.p_lo, "p_hi": r.p_hi }))
        .collect();
    let body = json!({ "rectangles": rects, "areaFraction": rep.area_fraction });
    let mut meta = base_meta("repeller");
    meta.insert("family".into(), json!(family.name()));
    meta.insert("l".into(), json!(l));
    meta.insert("t_back".into(), json!(t_back));
    meta.insert("t_fwd".into(), json!(t_fwd));
    meta.insert("seam_checked".into(), json!(true));
    meta.insert("rectangles".into(), json!(rep.rectangles.len()));
    meta.insert("areaFraction".into(), json!(rep.area_fraction));
    let mut staged = Staged::default();
    staged.add_json("repeller.json", &body)?;
    staged.add_json("meta.json", &Value::Object(meta))?;
    staged.commit(&out)
}

fn tau(n: usize, ls: &[u32], min_modulus: f64, s: &SpectralArgs, out: PathBuf) -> Result<Vec<PathBuf>> {
    let depths: Vec<Option<u32>> = if ls.is_empty() {
        vec![None]
    } else {
        ls.iter().map(|&l| Some(l)).collect()
    };
    // validate every depth before the first eigensolve
    let maps = depths
        .iter()
        .map(|&l| build_map(MapFamily::Dyadic, n, l, false))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::new(&["l", "index", "modulus", "tau"]);
    let mut fits = Map::new();
    for (&l, map) in depths.iter().zip(&maps) {
        let set = resonances(map, &options(s))?;
        let label = l.map_or_else(|| "closed".to_string(), |l| l.to_string());
        for (i, r) in set.resonances().iter().enumerate() {
            csv.row(&[label.clone(), i.to_string(), num(r.modulus), num(r.tau)]);
        }
        let entry = match l {
            Some(_) => {
                let fit = set.tau_fit(min_modulus)?;
                let used = set.resonances().iter().filter(|r| r.modulus > min_modulus).count();
                json!({ "slope": fit.slope, "intercept": fit.intercept, "points": used, "vCondition": set.v_condition() })
            }
            None => {
                let dev = set.resonances().iter().map(|r| (r.tau - 1.0).abs()).fold(0.0, f64::max);
                json!({ "max_tau_deviation": dev })
            }
        };
        fits.insert(label, entry);
    }
    let mut meta = base_meta("tau");
    meta.insert("family".into(), json!("dyadic"));
    meta.insert("N".into(), json!(n));
    meta.insert("l".into(), json!(ls));
    meta.insert("min_modulus".into(), json!(min_modulus));
    meta.insert("null_threshold".into(), json!(s.null_threshold));
    meta.insert("max_condition".into(), json!(s.max_condition));
    meta.insert("fits".into(), Value::Object(fits));
    let mut staged = Staged::default();
    staged.add("tau.csv", csv.into_bytes());
    staged.add_json("meta.json", &Value::Object(meta))?;
    staged.commit(&out)
}

#[allow(clippy::too_many_arguments)]
fn weyl(
    family: MapFamily,
    ns: &[usize],
    l: Option<u32>,
    closed: bool,
    nu_c: f64,
    s: &SpectralArgs,
    out: PathBuf,
) -> Result<Vec<PathBuf>> {
    if !(nu_c > 0.0 && nu_c <= 1.0) {
        return Err(Error::Domain(format!("--nu-c must lie in (0, 1], got {nu_c}")).into());
    }
    let maps = ns
        .iter()
        .map(|&n| build_map(family, n, l, closed))
        .collect::<Result<Vec<_>, _>>()?;
    let mut counts = Vec::with_capacity(ns.len());
    for (&n, map) in ns.iter().zip(&maps) {
        let set = resonances(map, &options(s))?;
        counts.push((n, set.weyl_count(nu_c)));
    }
    let fit = weyl_fit(&counts, nu_c)?;
    let mut csv = Csv::new(&["N", "count"]);
    for (n, c) in &counts {
        csv.row(&[n.to_string(), c.to_string()]);
    }
    let mut meta = base_meta("weyl");
    meta.insert("family".into(), json!(family.name()));
    meta.insert("N".into(), json!(ns));
    meta.insert("l".into(), json!(l));
    meta.insert("closed".into(), json!(maps[0].opening().is_none()));
    meta.insert("nu_c".into(), json!(nu_c));
    meta.insert("null_threshold".into(), json!(s.null_threshold));
    meta.insert("max_condition".into(), json!(s.max_condition));
    meta.insert("exponent".into(), json!(fit.exponent));
    meta.insert("dimensionEstimate".into(), json!(fit.dimension_estimate));
    let mut staged = Staged::default();
    staged.add("weyl.csv", csv.into_bytes());
    staged.add_json("meta.json", &Value::Object(meta))?;
    staged.commit(&out)
}

fn entropy(l: u32, out: PathBuf) -> Result<Vec<PathBuf>> {
    let sys = transition_matrix(l)?;
    let body = json!({ "l": l, "leadingEigenvalue": sys.leading_eigenvalue(), "entropy": sys.entropy() });
    let mut meta = base_meta("entropy");
    meta.insert("l".into(), json!(l));
    meta.insert("states".into(), json!(sys.state_count()));
    let mut staged = Staged::default();
    staged.add_json("entropy.json", &body)?;
    staged.add_json("meta.json", &Value::Object(meta))?;
    staged.commit(&out)
}

fn escape(family: MapFamily, l: Option<u32>, samples: usize, steps: usize, seed: u64, out: PathBuf) -> Result<Vec<PathBuf>> {
    let opening = classical_opening(family, l)?;
    let est = escape_rate_mc(opening, samples, steps, seed)?;
    let body = json!({
        "gamma": est.gamma,
        "stderr": est.stderr,
        "samples": est.samples,
        "steps": est.steps,
        "survivors": est.survivors,
    });
    let mut meta = base_meta("escape");
    meta.insert("family".into(), json!(family.name()));
    meta.insert("l".into(), json!(l));
    meta.insert("samples".into(), json!(samples));
    meta.insert("steps".into(), json!(steps));
    meta.insert("seed".into(), json!(seed));
    meta.insert("bootstrap_replicates".into(), json!(openbaker::classical::BOOTSTRAP_REPLICATES));
    let mut staged = Staged::default();
    staged.add_json("escape.json", &body)?;
    staged.add_json("meta.json", &Value::Object(meta))?;
    staged.commit(&out)
}
