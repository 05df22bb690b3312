//! Law and sampler selection from command-line parameters.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use compstruct::laws::{
    ewens_cpf, markov_cpf, renewal_cpf, stationary_pair_from_spec, Cpf, DecrementMatrix, DecrementMatrixPair, LevySpec,
};
use compstruct::records::parse_decrement_pair;
use compstruct::stochastic::{
    fragment_sample, poisson_sampling_composition, sample_scale_invariant_partition, uniform_sampling_composition,
    BernoulliStringSampler, CompositionSampler, FragmentCpf, MarkovSampler, RenewalStringSampler, RngStream,
    ScaleInvariantSet,
};
use compstruct::{Composition, ParamValue, Rational, Scalar};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Ewens(θ) Bernoulli-string law.
    Ewens,
    /// Renewal(α) law, meander on the right.
    Renewal,
    /// Renewal(α) read right to left.
    RenewalReversed,
    /// Stationary Markov law of the Lévy pair (α, θ); its partition is (α, θ−α).
    TwoParam,
    /// Product formula from a decrement-matrix file (`--table`).
    MarkovTable,
    /// Ewens(θ) with every part broken by renewal(α).
    Fragment,
}

#[derive(Debug, Clone, Args)]
pub struct LawArgs {
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Exact as `p/q` or an integer; a decimal switches to float mode.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub theta: Option<String>,
    /// Decrement matrices for `markov-table`, in `q<TAB>n<TAB>m<TAB>p/q` records.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Reverse the inner renewal law of `fragment`.
    #[arg(long)]
    pub inner_reversed: bool,
}

pub fn parse_param(name: &str, raw: &str) -> Result<ParamValue, CliError> {
    raw.parse::<ParamValue>()
        .map_err(|e| CliError::invalid(format!("--{name}: {e}")))
}

impl LawArgs {
    pub fn family(&self) -> Result<Family, CliError> {
        self.family.ok_or_else(|| CliError::invalid("--family is required"))
    }

    fn param(&self, name: &'static str) -> Result<Option<ParamValue>, CliError> {
        let raw = match name {
            "alpha" => &self.alpha,
            _ => &self.theta,
        };
        raw.as_deref().map(|r| parse_param(name, r)).transpose()
    }

    fn required(&self, name: &'static str) -> Result<ParamValue, CliError> {
        let family = self.family()?;
        self.param(name)?
            .ok_or_else(|| CliError::invalid(format!("--{name} is required for {family:?}")))
    }

    /// Exact unless a decimal parameter was given.
    pub fn exact(&self) -> Result<bool, CliError> {
        Ok([self.param("alpha")?, self.param("theta")?]
            .iter()
            .flatten()
            .all(ParamValue::is_exact))
    }

    fn value<S: Scalar>(&self, name: &'static str) -> Result<S, CliError> {
        Ok(self.required(name)?.to_scalar()?)
    }

    fn float(&self, name: &'static str) -> Result<f64, CliError> {
        Ok(self.required(name)?.to_f64())
    }

    fn table_pair<S: Scalar>(&self) -> Result<DecrementMatrixPair<S>, CliError> {
        let path = self
            .table
            .as_ref()
            .ok_or_else(|| CliError::invalid("--table is required for markov-table"))?;
        let text = std::fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
        let pair = parse_decrement_pair(&text)?;
        let convert =
            |m: &DecrementMatrix<Rational>| DecrementMatrix::from_fn(m.max_n(), |n, k| S::from_rational(&m.get(n, k)));
        let pair = DecrementMatrixPair::new(convert(&pair.q), convert(&pair.q_star));
        let tol = if S::EXACT { 0.0 } else { 1e-9 };
        pair.q.validate("q", tol)?;
        pair.q_star.validate("q*", tol)?;
        Ok(pair)
    }

    /// Decrement matrices for the Markov families, up to `max_n`.
    pub fn pair<S: Scalar>(&self, max_n: usize) -> Result<Option<DecrementMatrixPair<S>>, CliError> {
        Ok(match self.family()? {
            Family::TwoParam => {
                let spec = LevySpec::two_param(self.value::<S>("alpha")?, self.value::<S>("theta")?)?;
                Some(stationary_pair_from_spec(&spec, max_n)?)
            }
            Family::MarkovTable => Some(self.table_pair()?),
            _ => None,
        })
    }

    /// The law in the arithmetic of `S`, supporting at least `max_n` where
    /// that matters.
    pub fn law<S: Scalar>(&self, max_n: usize) -> Result<Box<dyn Cpf<S>>, CliError> {
        Ok(match self.family()? {
            Family::Ewens => Box::new(ewens_cpf(self.value::<S>("theta")?)?),
            Family::Renewal => Box::new(renewal_cpf(self.value::<S>("alpha")?, false)?),
            Family::RenewalReversed => Box::new(renewal_cpf(self.value::<S>("alpha")?, true)?),
            Family::TwoParam => {
                let (a, t) = (self.value::<S>("alpha")?, self.value::<S>("theta")?);
                let name = format!("two-param({a},{t})");
                let pair = self.pair::<S>(max_n)?.expect("two-param has matrices");
                Box::new(markov_cpf(pair).with_family(name))
            }
            Family::MarkovTable => {
                let pair = self.pair::<S>(max_n)?.expect("markov-table has matrices");
                Box::new(markov_cpf(pair).with_family("markov-table"))
            }
            Family::Fragment => Box::new(FragmentCpf::new(
                ewens_cpf(self.value::<S>("theta")?)?,
                renewal_cpf(self.value::<S>("alpha")?, self.inner_reversed)?,
            )),
        })
    }

    /// A float sampler for the family, drawn by `construction`.
    pub fn sampler(&self, construction: Construction, max_n: usize) -> Result<Box<dyn CompositionSampler>, CliError> {
        let family = self.family()?;
        let unsupported =
            || CliError::invalid(format!("construction {construction:?} is not available for {family:?}"));
        Ok(match (family, construction) {
            (Family::Ewens, Construction::String) => Box::new(BernoulliStringSampler {
                theta: self.float("theta")?,
            }),
            (Family::Ewens, Construction::UniformSampling) => {
                let theta = self.float("theta")?;
                ScaleInvariantSet::new(theta, &mut RngStream::new(0, 0))?;
                Box::new(FnSampler(move |n, rng: &mut RngStream| {
                    let mut partition = sample_scale_invariant_partition(theta, 1e-3, rng)?;
                    uniform_sampling_composition(&mut partition, n, rng)
                }))
            }
            (Family::Ewens, Construction::PoissonSampling) => {
                let theta = self.float("theta")?;
                ScaleInvariantSet::new(theta, &mut RngStream::new(0, 0))?;
                Box::new(FnSampler(move |n, rng: &mut RngStream| {
                    let mut set = ScaleInvariantSet::new(theta, rng)?;
                    poisson_sampling_composition(&mut set, n, rng)
                }))
            }
            (Family::Renewal | Family::RenewalReversed, Construction::String) => {
                let alpha = self.float("alpha")?;
                renewal_cpf(alpha, false)?;
                Box::new(RenewalStringSampler {
                    alpha,
                    reversed: family == Family::RenewalReversed,
                })
            }
            (Family::TwoParam | Family::MarkovTable, Construction::Markov) => {
                Box::new(MarkovSampler::new(&self.pair::<f64>(max_n)?.expect("markov family"))?)
            }
            (Family::Fragment, Construction::String) => {
                let outer = BernoulliStringSampler {
                    theta: self.float("theta")?,
                };
                let inner = RenewalStringSampler {
                    alpha: self.float("alpha")?,
                    reversed: self.inner_reversed,
                };
                ewens_cpf(outer.theta)?;
                renewal_cpf(inner.alpha, false)?;
                Box::new(FnSampler(move |n, rng: &mut RngStream| {
                    let c = outer.sample(n, rng)?;
                    fragment_sample(&c, &inner, rng)
                }))
            }
            _ => return Err(unsupported()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Construction {
    /// Binary-string sampler (Ewens, renewal, fragment).
    String,
    /// Decreasing-chain sampler from the decrement matrices.
    Markov,
    /// Uniform points thrown on the scale-invariant Poisson set (Ewens).
    UniformSampling,
    /// Poisson arrivals tested against the scale-invariant set (Ewens).
    PoissonSampling,
}

impl Construction {
    pub fn default_for(family: Family) -> Self {
        match family {
            Family::TwoParam | Family::MarkovTable => Construction::Markov,
            _ => Construction::String,
        }
    }
}

struct FnSampler<F>(F);

impl<F> CompositionSampler for FnSampler<F>
where
    F: Fn(usize, &mut RngStream) -> compstruct::Result<Composition> + Send + Sync,
{
    fn sample(&self, n: usize, rng: &mut RngStream) -> compstruct::Result<Composition> {
        (self.0)(n, rng)
    }
}
