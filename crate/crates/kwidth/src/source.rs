//! Operator sources: `--input` files and `--channel kind=...,k=v` strings.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use kwidth_core::channels::{make_channel, ChannelKind, ChannelSpec, Decay};
use kwidth_core::quadrature::Rule;
use kwidth_core::truncation::{legendre_family, KernelOperator, SequenceOperator};
use kwidth_core::{NormKind, NormSpec, Operator};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::io::{read_matrix, read_weights, NormDoc};

/// Parsed `--channel` string.
#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    DiagonalValues(Vec<f64>),
    Kind(ChannelKind),
}

fn parse_decay(s: &str) -> Result<Decay> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let num = |what: &str| -> Result<f64> {
        arg.ok_or_else(|| anyhow!("decay `{name}` needs a parameter, e.g. {name}:{what}"))?
            .parse::<f64>()
            .with_context(|| format!("bad decay parameter in `{s}`"))
    };
    Ok(match name {
        "harmonic" => Decay::Harmonic,
        "geometric" => Decay::Geometric(num("0.5")?),
        "power" => Decay::Power(num("2")?),
        _ => bail!("unknown decay `{name}` (harmonic, geometric:r, power:p)"),
    })
}

struct Params {
    kind: String,
    map: BTreeMap<String, String>,
}

impl Params {
    fn parse(s: &str) -> Result<Params> {
        let mut kind = None;
        let mut map = BTreeMap::new();
        for (i, tok) in s.split(',').map(str::trim).filter(|t| !t.is_empty()).enumerate() {
            match tok.split_once('=') {
                Some(("kind", v)) => kind = Some(v.to_string()),
                Some((k, v)) => {
                    if map.insert(k.to_string(), v.to_string()).is_some() {
                        bail!("channel parameter `{k}` given twice");
                    }
                }
                None if i == 0 => kind = Some(tok.to_string()),
                None => bail!("channel parameter `{tok}` is not of the form key=value"),
            }
        }
        let kind = kind.ok_or_else(|| anyhow!("channel string needs a kind"))?;
        Ok(Params { kind, map })
    }

    fn take<T: std::str::FromStr>(&mut self, key: &str, default: Option<T>) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.remove(key) {
            Some(v) => v.parse::<T>().map_err(|e| anyhow!("channel parameter {key}=`{v}`: {e}")),
            None => default.ok_or_else(|| anyhow!("channel `{}` needs parameter `{key}`", self.kind)),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some(k) = self.map.keys().next() {
            bail!("unknown parameter `{k}` for channel `{}`", self.kind);
        }
        Ok(())
    }
}

pub fn parse_channel(s: &str) -> Result<Channel> {
    let mut p = Params::parse(s)?;
    let out = match p.kind.as_str() {
        "diagonal" => {
            if let Some(v) = p.map.remove("values") {
                let values = v
                    .split(':')
                    .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad diagonal value `{t}`")))
                    .collect::<Result<Vec<f64>>>()?;
                if values.is_empty() || values.iter().any(|x| !x.is_finite()) {
                    bail!("diagonal values must be finite numbers");
                }
                Channel::DiagonalValues(values)
            } else {
                let size = p.take("size", None)?;
                let decay = parse_decay(&p.take::<String>("decay", Some("harmonic".into()))?)?;
                Channel::Kind(ChannelKind::Diagonal { size, decay })
            }
        }
        "gaussian_kernel" => {
            let width = p.take("width", Some(0.02))?;
            let a = p.take("a", Some(0.0))?;
            let b = p.take("b", Some(1.0))?;
            let nodes = p.take("nodes", Some(64))?;
            let rule: Rule = p.take::<String>("rule", Some("gauss_legendre".into()))?.parse()?;
            if !(a < b) {
                bail!("gaussian_kernel needs a < b");
            }
            Channel::Kind(ChannelKind::GaussianKernel { width, interval: (a, b), nodes, rule })
        }
        "timefreq_limiter" => {
            let size = p.take("size", Some(256))?;
            let bandwidth = match p.map.remove("bandwidth") {
                Some(v) => v.parse().with_context(|| format!("bad bandwidth `{v}`"))?,
                None => p.take("w", Some(0.1))?,
            };
            Channel::Kind(ChannelKind::TimefreqLimiter { size, bandwidth })
        }
        "random_gaussian" => {
            let rows = p.take("rows", None)?;
            let cols = p.take("cols", Some(rows))?;
            let seed = p.take("seed", Some(0))?;
            Channel::Kind(ChannelKind::RandomGaussian { rows, cols, seed })
        }
        other => bail!("unknown channel kind `{other}` (diagonal, gaussian_kernel, timefreq_limiter, random_gaussian)"),
    };
    p.finish()?;
    Ok(out)
}

fn decay_json(d: Decay) -> Value {
    match d {
        Decay::Harmonic => json!("harmonic"),
        Decay::Geometric(r) => json!({ "geometric": r }),
        Decay::Power(p) => json!({ "power": p }),
    }
}

impl Channel {
    /// Fully resolved parameters, defaults included.
    pub fn describe(&self) -> Value {
        match self {
            Channel::DiagonalValues(v) => json!({ "kind": "diagonal", "values": v }),
            Channel::Kind(ChannelKind::Diagonal { size, decay }) => json!({ "kind": "diagonal", "size": size, "decay": decay_json(*decay) }),
            Channel::Kind(ChannelKind::GaussianKernel { width, interval, nodes, rule }) => json!({
                "kind": "gaussian_kernel", "width": width, "a": interval.0, "b": interval.1, "nodes": nodes, "rule": rule.name()
            }),
            Channel::Kind(ChannelKind::TimefreqLimiter { size, bandwidth }) => json!({ "kind": "timefreq_limiter", "size": size, "bandwidth": bandwidth }),
            Channel::Kind(ChannelKind::RandomGaussian { rows, cols, seed }) => json!({ "kind": "random_gaussian", "rows": rows, "cols": cols, "seed": seed }),
            Channel::Kind(ChannelKind::Dense(_)) => json!({ "kind": "from_file" }),
        }
    }

    fn kind(&self) -> ChannelKind {
        match self {
            Channel::DiagonalValues(v) => ChannelKind::Dense(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(v.clone()))),
            Channel::Kind(k) => k.clone(),
        }
    }
}

/// Where the operator comes from, as given on the command line.
#[derive(Debug, Clone)]
pub struct SourceRequest {
    pub input: Option<PathBuf>,
    pub channel: Option<String>,
    pub domain_norm: Option<String>,
    pub codomain_norm: Option<String>,
    pub domain_weights: Option<PathBuf>,
    pub codomain_weights: Option<PathBuf>,
}

/// Operator plus what is needed to rebuild it as a column family.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub op: Operator,
    pub channel: Option<Channel>,
    /// Resolved source and norms, for the emitted config block.
    pub config: Value,
}

fn norm_from_flags(flag: Option<&str>, weights: Option<&PathBuf>, file: Option<NormSpec>) -> Result<NormSpec> {
    let kind = match flag {
        Some(s) => Some(s.parse::<NormKind>()?),
        None => None,
    };
    let weights = weights.map(|p| read_weights(p)).transpose()?;
    Ok(match (kind, weights, file) {
        (Some(k), Some(w), _) => NormSpec::weighted(k, w)?,
        (Some(k), None, _) => NormSpec::new(k),
        (None, Some(w), Some(f)) => NormSpec::weighted(f.kind(), w)?,
        (None, Some(w), None) => NormSpec::weighted(NormKind::P2, w)?,
        (None, None, Some(f)) => f,
        (None, None, None) => NormSpec::p2(),
    })
}

impl SourceRequest {
    pub fn resolve(&self) -> Result<Resolved> {
        let (matrix_kind, channel, source, file_dom, file_cod) = match (&self.input, &self.channel) {
            (Some(_), Some(_)) => bail!("give either --input or --channel, not both"),
            (None, None) => bail!("an operator source is required: --input FILE or --channel kind=...,k=v"),
            (Some(path), None) => {
                let loaded = read_matrix(path)?;
                let source = json!({ "kind": "from_file", "path": path.display().to_string() });
                (ChannelKind::Dense(loaded.matrix), None, source, loaded.domain, loaded.codomain)
            }
            (None, Some(s)) => {
                let ch = parse_channel(s)?;
                (ch.kind(), Some(ch.clone()), ch.describe(), None, None)
            }
        };
        let domain = norm_from_flags(self.domain_norm.as_deref(), self.domain_weights.as_ref(), file_dom)?;
        let codomain = norm_from_flags(self.codomain_norm.as_deref(), self.codomain_weights.as_ref(), file_cod)?;
        let config = json!({
            "source": source,
            "domain_norm": NormDoc::from_spec(&domain),
            "codomain_norm": NormDoc::from_spec(&codomain),
        });
        let op = make_channel(&ChannelSpec { kind: matrix_kind, domain, codomain })?;
        Ok(Resolved { op, channel, config })
    }
}

impl Resolved {
    /// Column family whose first `m` columns give the `m`-th truncation.
    ///
    /// Kernel channels switch to the nested Legendre-mode family with
    /// `modes` modes; every other source is truncated by column prefix.
    pub fn family(&self, modes: usize) -> Result<SequenceOperator> {
        if let Some(Channel::Kind(ChannelKind::GaussianKernel { width, interval, nodes, rule })) = &self.channel {
            if !self.op.is_hilbert() || self.op.domain().norm.weights().is_some() || self.op.codomain().norm.weights().is_some() {
                bail!("kernel ladders use unweighted L2 norms on both sides");
            }
            let w = *width;
            let k = KernelOperator::new(move |s, t| (-(s - t) * (s - t) / w).exp(), *interval, *interval, *rule)?;
            return Ok(legendre_family(&k, *nodes, modes, (4 * modes).max(256))?);
        }
        let dom = &self.op.domain().norm;
        let cod = self.op.codomain().norm.clone();
        // a weighted domain is absorbed into the columns
        let m = DMatrix::from_fn(self.op.rows(), self.op.cols(), |i, j| self.op.matrix()[(i, j)] / dom.weight(j));
        let tails: Vec<f64> = (0..m.ncols()).map(|j| cod.norm(m.column(j).as_slice())).collect::<kwidth_core::Result<_>>()?;
        let cols = m.ncols();
        Ok(SequenceOperator::new(
            m.nrows(),
            dom.kind(),
            cod,
            move |i, j| if j < cols { m[(i, j)] } else { 0.0 },
            move |j| tails.get(j).copied().unwrap_or(0.0),
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_strings() {
        assert_eq!(parse_channel("diagonal,values=3:2:1").unwrap(), Channel::DiagonalValues(vec![3.0, 2.0, 1.0]));
        assert_eq!(
            parse_channel("kind=diagonal,size=4,decay=geometric:0.5").unwrap(),
            Channel::Kind(ChannelKind::Diagonal { size: 4, decay: Decay::Geometric(0.5) })
        );
        assert_eq!(
            parse_channel("timefreq_limiter,size=16,w=0.2").unwrap(),
            Channel::Kind(ChannelKind::TimefreqLimiter { size: 16, bandwidth: 0.2 })
        );
        assert_eq!(
            parse_channel("random_gaussian,rows=3").unwrap(),
            Channel::Kind(ChannelKind::RandomGaussian { rows: 3, cols: 3, seed: 0 })
        );
        let g = parse_channel("gaussian_kernel,nodes=8,rule=midpoint").unwrap();
        assert_eq!(g.describe()["rule"], "midpoint");
        assert_eq!(g.describe()["width"], 0.02);
    }

    #[test]
    fn bad_channel_strings() {
        for s in ["", "nope", "diagonal", "diagonal,size=3,foo=1", "diagonal,values=1:x", "diagonal,size=3,decay=power", "timefreq_limiter,size"] {
            assert!(parse_channel(s).is_err(), "{s}");
        }
    }

    #[test]
    fn norms_from_flags_override_file() {
        let r = SourceRequest {
            input: None,
            channel: Some("diagonal,values=3:2:1".into()),
            domain_norm: Some("p1".into()),
            codomain_norm: None,
            domain_weights: None,
            codomain_weights: None,
        };
        let res = r.resolve().unwrap();
        assert_eq!(res.op.domain().norm.kind(), NormKind::P1);
        assert_eq!(res.config["codomain_norm"]["kind"], "p2");
        let fam = res.family(3).unwrap();
        assert_eq!(fam.entry(1, 1), 2.0);
        assert_eq!(fam.column_tail_bound(5), 0.0);
    }
}
