use std::error::Error as StdError;
use std::fs;
use std::str::FromStr;

use corrseq::config::RunConfig;
use corrseq::correlation::{
    convergence_report, corr_brute, corr_closed, corr_factorized, BruteOptions,
    CorrelationResult, HARD_K_MAX_BRUTE,
};
use corrseq::eta::{
    obstruction_certificate, obstruction_verdict, sample_eta, synthetic_eta, DESK_SCALE_CAVEAT,
    OBSTRUCTION_THRESHOLD,
};
use corrseq::gen_nil::{
    cover_audit, frac_norm_check, interval_cover, irrationality_margin, theta_partial,
};
use corrseq::nets::{
    bracket_breakpoints, bracket_net, build_net, covering_audit, dft_sup_correlation, Family,
    NetSweep, PhaseNet, ProductNet,
};
use corrseq::report::{
    convergence_rows, corr_rows, csv_table, growth_rows, json_document, Metadata,
    CONVERGENCE_HEADER, CORR_HEADER, GROWTH_HEADER,
};
use corrseq::sparsity::{basis_condition_report, enumerate_s, growth_diagnostic};
use corrseq::{Error, Eta, EtaAssignment, ExactRatio, RadixBasis};
use num_bigint::{BigInt, BigUint};
use serde_json::{json, Value};

use crate::{Command, GlobalArgs};

type CliResult<T> = std::result::Result<T, Box<dyn StdError>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrMethod {
    Brute,
    Factorized,
    Closed,
    All,
}

impl FromStr for CorrMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "brute" => Ok(CorrMethod::Brute),
            "factorized" => Ok(CorrMethod::Factorized),
            "closed" => Ok(CorrMethod::Closed),
            "all" => Ok(CorrMethod::All),
            other => Err(format!("unknown method {other:?} (brute, factorized, closed, all)")),
        }
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    global: &'a GlobalArgs,
    basis: RadixBasis,
    command: &'static str,
}

impl Ctx<'_> {
    fn meta(&self) -> Metadata {
        Metadata::new(self.command, self.cfg)
    }

    fn emit(&self, name: &str, contents: &str) -> CliResult<()> {
        if self.global.stdout {
            print!("{contents}");
            return Ok(());
        }
        fs::create_dir_all(&self.cfg.out_dir)?;
        let path = self.cfg.out_dir.join(name);
        fs::write(&path, contents)?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn brute_options(&self) -> BruteOptions {
        BruteOptions {
            k_max: if self.cfg.allow_big {
                HARD_K_MAX_BRUTE.max(self.cfg.k_max_brute)
            } else {
                self.cfg.k_max_brute
            },
            parallel: true,
        }
    }

    fn top(&self) -> usize {
        self.basis.len()
    }

    /// `--eta-file`, then `--eta`, then a draw from the seed on `S[N_K]`.
    fn eta(&self) -> CliResult<EtaAssignment> {
        if let Some(path) = &self.global.eta_file {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            return Ok(EtaAssignment::from_json(&self.basis, &text)?);
        }
        if let Some(inline) = &self.global.eta {
            let mut out = EtaAssignment::constant(self.top(), Eta::Plus);
            for item in inline.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (key, value) = item
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("eta entry {item:?} is not n=value")))?;
                let n = parse_big(key)?;
                let pair = self
                    .basis
                    .recover_pair(&n)
                    .ok_or_else(|| Error::NotInSparseSet(key.trim().to_string()))?;
                out.insert(pair, value.trim().parse()?);
            }
            return Ok(out);
        }
        let domain = enumerate_s(&self.basis, self.basis.prefix(self.top()))?;
        Ok(sample_eta(self.cfg.rng, self.cfg.seed, &domain))
    }

    fn horizon(&self, horizon: &Option<String>, level: Option<usize>) -> CliResult<BigUint> {
        match (horizon, level) {
            (Some(_), Some(_)) => Err(Error::Config("give --horizon or --level, not both".into()).into()),
            (Some(h), None) => Ok(parse_big(h)?),
            (None, Some(k)) => {
                self.basis.check_level(k)?;
                Ok(self.basis.prefix(k).clone())
            }
            (None, None) => Ok(self.basis.prefix(self.top()).clone()),
        }
    }
}

fn parse_big(s: &str) -> std::result::Result<BigUint, Error> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{:?} is not a non-negative integer", s.trim())))
}

/// `p/q` or a terminating decimal, exactly.
pub fn parse_ratio(s: &str) -> std::result::Result<ExactRatio, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("{t:?} is not a rational number"));
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q == BigInt::from(0) {
            return Err(bad());
        }
        return Ok(ExactRatio::new(p, q));
    }
    let (int, frac) = t.split_once('.').unwrap_or((t, ""));
    if !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    Ok(ExactRatio::new(digits, BigInt::from(10u8).pow(frac.len() as u32)))
}

fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::BasisReport => "basis-report",
        Command::GenS { .. } => "gen-S",
        Command::EtaSample { .. } => "eta-sample",
        Command::Corr { .. } => "corr",
        Command::Converge { .. } => "converge",
        Command::NetsAudit { .. } => "nets-audit",
        Command::SupCorr { .. } => "sup-corr",
        Command::ThetaCheck { .. } => "theta-check",
        Command::Cover { .. } => "cover",
        Command::Certify { .. } => "certify",
    }
}

/// `Ok(false)` when a verdict fails.
pub fn run(cmd: &Command, cfg: &RunConfig, global: &GlobalArgs) -> CliResult<bool> {
    let ctx = Ctx {
        cfg,
        global,
        basis: cfg.make_basis()?,
        command: name(cmd),
    };
    match cmd {
        Command::BasisReport => basis_report(&ctx),
        Command::GenS { horizon, level } => gen_s(&ctx, ctx.horizon(horizon, *level)?),
        Command::EtaSample { level } => eta_sample(&ctx, *level),
        Command::Corr { k, d, method } => corr(&ctx, *k, &parse_big(d)?, *method),
        Command::Converge { d, k_min, k_max } => converge(&ctx, d, *k_min, *k_max),
        Command::NetsAudit {
            family,
            n,
            net_epsilon,
            samples,
        } => nets_audit(&ctx, *family, *n, *net_epsilon, *samples),
        Command::SupCorr { m, grid, threshold } => sup_corr(&ctx, *m, *grid, *threshold),
        Command::ThetaCheck { j_max, truncation } => theta_check(&ctx, *j_max, *truncation),
        Command::Cover {
            cover_epsilon,
            horizon,
            level,
        } => {
            let h = match horizon {
                Some(_) => ctx.horizon(horizon, None)?,
                None => ctx.horizon(&None, Some(*level))?,
            };
            cover(&ctx, &parse_ratio(cover_epsilon)?, &h)
        }
        Command::Certify { level } => certify(&ctx, *level),
    }
}

fn basis_report(ctx: &Ctx) -> CliResult<bool> {
    let report = basis_condition_report(&ctx.basis);
    let growth = growth_diagnostic(&ctx.basis, 2..=ctx.top())?;
    let ok = report.all_hold() && growth.iter().all(|r| r.bound_holds);
    let body = json!({ "conditions": report, "growth": growth, "all_hold": ok });
    ctx.emit("basis_report.json", &json_document(&ctx.meta(), body))?;
    ctx.emit("growth.csv", &csv_table(&ctx.meta(), &GROWTH_HEADER, &growth_rows(&growth)))?;
    println!(
        "basis: {} levels, gamma_K = {}, conditions hold: {ok}",
        report.levels, report.gamma
    );
    Ok(ok)
}

fn gen_s(ctx: &Ctx, horizon: BigUint) -> CliResult<bool> {
    let set = enumerate_s(&ctx.basis, &horizon)?;
    let elements: Vec<String> = set.elements().iter().map(|e| e.to_string()).collect();
    let body = json!({ "horizon": horizon.to_string(), "count": set.len(), "elements": elements });
    ctx.emit("S.json", &json_document(&ctx.meta(), body))?;
    println!("|S[{horizon}]| = {}", set.len());
    Ok(true)
}

fn eta_sample(ctx: &Ctx, level: Option<usize>) -> CliResult<bool> {
    let k = level.unwrap_or(ctx.top());
    ctx.basis.check_level(k)?;
    let domain = enumerate_s(&ctx.basis, ctx.basis.prefix(k))?;
    let eta = sample_eta(ctx.cfg.rng, ctx.cfg.seed, &domain);
    let minus = eta.iter().filter(|(_, e)| *e == Eta::MinusThird).count();
    let mut text = eta.to_json(&ctx.basis)?;
    text.push('\n');
    ctx.emit("eta.json", &text)?;
    println!(
        "sampled {} signs on S[N_{k}] ({} at -1/3) with {} seed {}",
        eta.len(),
        minus,
        ctx.cfg.rng.id(),
        ctx.cfg.seed
    );
    Ok(true)
}

fn corr(ctx: &Ctx, k: usize, d: &BigUint, method: CorrMethod) -> CliResult<bool> {
    let eta = ctx.eta()?;
    let mut results: Vec<CorrelationResult> = Vec::new();
    match method {
        CorrMethod::Brute => results.push(corr_brute(&ctx.basis, k, d, &eta, ctx.brute_options())?),
        CorrMethod::Factorized => results.push(corr_factorized(&ctx.basis, k, d, &eta)?),
        CorrMethod::Closed => results.push(corr_closed(&ctx.basis, k, d, &eta)?),
        CorrMethod::All => {
            results.push(corr_brute(&ctx.basis, k, d, &eta, ctx.brute_options())?);
            results.push(corr_factorized(&ctx.basis, k, d, &eta)?);
            match corr_closed(&ctx.basis, k, d, &eta) {
                Ok(r) => results.push(r),
                Err(Error::NoFreeCoordinate { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    let ok = results.windows(2).all(|w| w[0].value == w[1].value);
    ctx.emit("corr.csv", &csv_table(&ctx.meta(), &CORR_HEADER, &corr_rows(&results)))?;
    for r in &results {
        println!("S_{k}({d}) = {} [{}]", r.value, r.method);
    }
    if !ok {
        println!("methods disagree");
    }
    Ok(ok)
}

fn converge(ctx: &Ctx, ds: &[String], k_min: usize, k_max: usize) -> CliResult<bool> {
    if k_min > k_max {
        return Err(Error::InvalidParameter(format!("k_min {k_min} > k_max {k_max}")).into());
    }
    let eta = ctx.eta()?;
    let mut rows = Vec::new();
    let mut ok = true;
    for d in ds {
        let rep = convergence_report(&ctx.basis, &parse_big(d)?, &eta, k_min..=k_max, ctx.brute_options())?;
        ok &= rep.all_hold();
        println!("d = {d}: S_k(d)/gamma_k = eta(d) at every applicable row: {}", rep.all_hold());
        rows.extend(convergence_rows(&rep));
    }
    ctx.emit("convergence.csv", &csv_table(&ctx.meta(), &CONVERGENCE_HEADER, &rows))?;
    Ok(ok)
}

fn nets_audit(ctx: &Ctx, family: Family, n: u64, eps: f64, samples: usize) -> CliResult<bool> {
    let net = build_net(family, n, eps)?;
    let audit = covering_audit(family, n, eps, samples, ctx.cfg.rng, ctx.cfg.seed)?;
    let mut body = json!({ "net": net.describe(), "audit": audit });
    if family == Family::Bracket {
        body["breakpoints"] = json!(bracket_breakpoints(n)?.len());
        body["breakpoint_bound"] = json!(n * n);
    }
    ctx.emit("nets_audit.json", &json_document(&ctx.meta(), body))?;
    println!(
        "{} net: {} members, worst distance over {} samples {:.6} (<= {eps}: {})",
        family,
        net.member_count(),
        samples,
        audit.worst,
        audit.passed
    );
    Ok(audit.passed)
}

fn sup_corr(ctx: &Ctx, m: usize, grid: u64, threshold: Option<f64>) -> CliResult<bool> {
    let w: Vec<_> = synthetic_eta(ctx.cfg.rng, ctx.cfg.seed, m)
        .iter()
        .map(|e| num_complex_real(e.as_f64()))
        .collect();
    let r = dft_sup_correlation(&w, grid)?;
    let ok = threshold.is_none_or(|t| r.sup <= t);
    let body = json!({ "m": m, "result": r, "threshold": threshold, "passed": ok });
    ctx.emit("sup_corr.json", &json_document(&ctx.meta(), body))?;
    println!(
        "sup over {grid} grid points = {:.6} at alpha = {} (slack {:.3e})",
        r.sup, r.argmax_alpha, r.lipschitz_slack
    );
    Ok(ok)
}

fn num_complex_real(x: f64) -> corrseq::nets::Complex {
    corrseq::nets::Complex::new(x, 0.0)
}

fn theta_check(ctx: &Ctx, j_max: usize, truncation: Option<usize>) -> CliResult<bool> {
    let prec = ctx.cfg.gen_precision();
    let big_j = truncation.unwrap_or(ctx.top() - 1);
    let checks = (0..=j_max)
        .map(|j| frac_norm_check(&ctx.basis, j, big_j, prec))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let ok = checks.iter().all(|c| c.verdict);
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.j.to_string(),
                c.truncation.to_string(),
                c.enclosure_lo.clone(),
                c.enclosure_hi.clone(),
                format!("{:.15e}", c.enclosure_lo_approx),
                format!("{:.15e}", c.enclosure_hi_approx),
                c.bound.clone(),
                format!("{:.15e}", c.bound_approx),
                c.arithmetic.to_string(),
                c.verdict.to_string(),
            ]
        })
        .collect();
    let header = [
        "j", "J", "enclosure_lo", "enclosure_hi", "lo_approx", "hi_approx", "bound", "bound_approx",
        "arithmetic", "verdict",
    ];
    ctx.emit("theta_check.csv", &csv_table(&ctx.meta(), &header, &rows))?;
    let partials = (1..ctx.top())
        .map(|j| theta_partial(&ctx.basis, j).map(|t| t.to_json()))
        .collect::<std::result::Result<Vec<Value>, _>>()?;
    let margin = irrationality_margin(&ctx.basis, j_max.min(ctx.top() - 2), prec)?;
    let margin_ok = margin.iter().all(|r| r.positive && r.below_bound);
    let body = json!({ "checks": checks, "theta": partials, "irrationality_margin": margin });
    ctx.emit("theta_check.json", &json_document(&ctx.meta(), body))?;
    println!("||theta N_j|| < 1/(M_(j+1) - 1) for j = 0..={j_max} (J = {big_j}): {ok}");
    Ok(ok && margin_ok)
}

fn cover(ctx: &Ctx, eps: &ExactRatio, horizon: &BigUint) -> CliResult<bool> {
    let prec = ctx.cfg.gen_precision();
    let c = interval_cover(&ctx.basis, eps, prec)?;
    let audit = cover_audit(&ctx.basis, &c, horizon, prec)?;
    let ok = c.length_below_epsilon() && audit.verdict;
    let body = json!({ "cover": c.to_json(), "audit": audit });
    ctx.emit("cover.json", &json_document(&ctx.meta(), body))?;
    println!("{}", c.summary());
    println!(
        "audit over S[{horizon}]: {} elements, {} by points, {} by intervals, verdict {}",
        audit.checked, audit.by_point, audit.by_interval, audit.verdict
    );
    Ok(ok)
}

fn certify(ctx: &Ctx, level: usize) -> CliResult<bool> {
    ctx.basis.check_level(level)?;
    let set = enumerate_s(&ctx.basis, ctx.basis.prefix(level))?;
    if set.is_empty() {
        return Err(Error::Empty("sparse set").into());
    }
    let horizon = u64::try_from(set.max_element())
        .map_err(|_| Error::InvalidParameter("S[N] exceeds the 64-bit net horizon".into()))?;
    let eta = ctx.eta()?;
    let mut reports = Vec::new();
    let mut consistent = true;
    for &family in &ctx.cfg.families {
        for &eps in &ctx.cfg.epsilon {
            let net: Box<dyn NetSweep> = match family {
                Family::Product => {
                    let f = bracket_net(horizon, eps / 2.0)?;
                    Box::new(ProductNet::new(vec![f.clone(), f])?)
                }
                other => Box::new(build_net(other, horizon, eps)?) as Box<dyn NetSweep>,
            };
            let effective = match family {
                Family::Product => net.member_count(),
                _ => net_work(&build_net(family, horizon, eps)?, &set),
            };
            if effective > ctx.cfg.max_members as u128 {
                return Err(Error::NetTooLarge {
                    count: effective.to_string(),
                    cap: ctx.cfg.max_members,
                }
                .into());
            }
            let r = obstruction_certificate(&ctx.basis, &eta, net.as_ref(), &set, ctx.cfg.budget)?;
            consistent &= r.obstructed == obstruction_verdict(r.delta, r.epsilon_net, r.v);
            println!(
                "{}: delta = {:.6}, V*(delta+eps) = {:.6} vs {OBSTRUCTION_THRESHOLD}: {}",
                r.net_id, r.delta, r.bound, r.verdict
            );
            reports.push(r);
        }
    }
    let body = json!({
        "level": level,
        "set_size": set.len(),
        "rule": "obstructed iff V*(delta + eps) < 1/10",
        "reports": reports,
        "caveat": DESK_SCALE_CAVEAT,
    });
    ctx.emit("certify.json", &json_document(&ctx.meta(), body))?;
    println!("{DESK_SCALE_CAVEAT}");
    Ok(consistent)
}

/// Members that a sweep over `set` actually evaluates.
fn net_work(net: &PhaseNet, set: &corrseq::SparseSet) -> u128 {
    if net.family() != Family::Bracket {
        return net.member_count();
    }
    let points: Vec<u64> = set.elements().iter().filter_map(|e| u64::try_from(e).ok()).collect();
    let mut distinct = 0u128;
    let mut last: Option<Vec<u64>> = None;
    for beta in net.betas() {
        let profile: Vec<u64> = points.iter().map(|&n| beta.floor_mul(n)).collect();
        if last.as_ref() != Some(&profile) {
            distinct += 1;
            last = Some(profile);
        }
    }
    distinct * net.alpha_count() as u128
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_parse_exactly() {
        let r = |n: i64, d: i64| ExactRatio::new(n.into(), d.into());
        assert_eq!(parse_ratio("1/5").unwrap(), r(1, 5));
        assert_eq!(parse_ratio("0.2").unwrap(), r(1, 5));
        assert_eq!(parse_ratio(" 0.125 ").unwrap(), r(1, 8));
        assert_eq!(parse_ratio("3").unwrap(), r(3, 1));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("0.2e3").is_err());
        assert!(parse_ratio("x").is_err());
    }

    #[test]
    fn methods_parse() {
        assert_eq!("all".parse::<CorrMethod>().unwrap(), CorrMethod::All);
        assert!("fast".parse::<CorrMethod>().is_err());
    }
}
