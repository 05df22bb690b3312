use std::collections::BTreeMap;

use compstruct::laws::partition_law;
use compstruct::stochastic::{
    arrange_partition, replicate, sample_gem, sample_gem_pd2, sample_paintbox_partition, sample_sequential_partition,
    GemConvention,
};
use compstruct::verify::{chi_square_gof, within_sigma};
use compstruct::{enumerate_compositions, enumerate_partitions, Composition, Partition, Rational, Scalar};

fn partition_p<F>(alpha: f64, theta: f64, seed: u64, draw: F) -> f64
where
    F: Fn(&mut compstruct::stochastic::RngStream) -> compstruct::Result<Partition> + Sync,
{
    let n = 5;
    let draws = replicate(200_000, 8, seed, draw).unwrap();
    let mut counts: BTreeMap<Partition, u64> = BTreeMap::new();
    for p in draws {
        *counts.entry(p).or_insert(0) += 1;
    }
    let expected: Vec<(Partition, f64)> = enumerate_partitions(n)
        .unwrap()
        .into_iter()
        .map(|p| {
            let w = partition_law(&alpha, &theta, &p).unwrap();
            (p, w)
        })
        .collect();
    chi_square_gof(&counts, &expected).unwrap().p_value
}

fn sequential_p(alpha: f64, theta: f64, conv: GemConvention, seed: u64) -> f64 {
    partition_p(alpha, theta, seed, |rng| {
        sample_sequential_partition(alpha, theta, 5, conv, rng)
    })
}

// Only the Beta(1-α, θ+iα) sticks reproduce the two-parameter partition law
// away from α = θ, where the two conventions coincide.
#[test]
fn standard_convention_matches_partition_law() {
    let standard = sequential_p(0.5, 1.0, GemConvention::Standard, 101);
    let literal = sequential_p(0.5, 1.0, GemConvention::Literal, 101);
    assert!(standard > 1e-3, "standard p = {standard}");
    assert!(literal < 1e-3, "literal p = {literal}");
    assert!(sequential_p(0.5, 2.0, GemConvention::Standard, 102) > 1e-3);
    assert!(sequential_p(0.5, 0.5, GemConvention::Literal, 103) > 1e-3);
}

#[test]
fn paintbox_matches_partition_law() {
    for (alpha, theta, seed) in [(0.5, 1.0, 111), (0.5, 0.5, 112), (0.0, 1.0, 113)] {
        let p = partition_p(alpha, theta, seed, |rng| {
            sample_paintbox_partition(alpha, theta, 5, GemConvention::Standard, rng)
        });
        assert!(p > 1e-3, "({alpha}, {theta}): p = {p}");
    }
}

// Arranging paintbox partitions reproduces the exact product law.
#[test]
fn arranged_paintbox_matches_product_law() {
    use compstruct::laws::{markov_cpf, stationary_pair_from_spec, Cpf, LevySpec};
    let n = 5;
    let draws = replicate(200_000, 8, 103, |rng| {
        let p = sample_paintbox_partition(0.5, 0.5, n, GemConvention::Standard, rng)?;
        arrange_partition(&p, 0.5, 0.5, rng)
    })
    .unwrap();
    let counts = compstruct::stochastic::count_draws(&draws);
    let spec = LevySpec::two_param(Rational::from_ratio(1, 2), Rational::from_ratio(1, 1)).unwrap();
    let law = markov_cpf(stationary_pair_from_spec(&spec, n).unwrap());
    let expected: Vec<(Composition, f64)> = enumerate_compositions(n)
        .unwrap()
        .into_iter()
        .map(|c| {
            let p = law.prob(&c).unwrap().to_f64();
            (c, p)
        })
        .collect();
    let r = chi_square_gof(&counts, &expected).unwrap();
    assert!(r.p_value > 1e-3, "{r:?}");
}

#[test]
fn pd2_first_two_moments_of_largest() {
    let (alpha, theta, k) = (0.5, 2.0, 400);
    let stats = |conv, seed, pd2: bool| {
        let xs = replicate(100_000, 8, seed, |rng| {
            let v = if pd2 {
                sample_gem_pd2(alpha, theta, k, conv, rng)?
            } else {
                sample_gem(alpha, theta, k, conv, rng)?
            };
            Ok(v.into_iter().fold(0.0, f64::max))
        })
        .unwrap();
        let n = xs.len() as f64;
        let m1 = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n;
        let s1 = (m2 - m1 * m1).sqrt() / n.sqrt();
        let s2 = ((xs.iter().map(|x| x.powi(4)).sum::<f64>() / n - m2 * m2).sqrt()) / n.sqrt();
        (m1, m2, s1, s2)
    };
    let (a1, a2, s1, s2) = stats(GemConvention::Standard, 104, false);
    let (b1, b2, t1, t2) = stats(GemConvention::Standard, 105, true);
    let sd1 = (s1 * s1 + t1 * t1).sqrt();
    let sd2 = (s2 * s2 + t2 * t2).sqrt();
    assert!(within_sigma(a1, b1, sd1, 3.0), "{a1} vs {b1}");
    assert!(within_sigma(a2, b2, sd2, 3.0), "{a2} vs {b2}");
}

#[test]
fn gem_first_stick_and_uniform_case() {
    let draws = replicate(100_000, 4, 106, |rng| {
        Ok(sample_gem(0.0, 1.0, 1, GemConvention::Standard, rng)?[0])
    })
    .unwrap();
    let ks = compstruct::verify::ks_against(&draws, |x| x.clamp(0.0, 1.0)).unwrap();
    assert!(ks.p_value > 1e-3, "{ks:?}");
    let draws = replicate(100_000, 4, 107, |rng| {
        Ok(sample_gem(0.5, 1.0, 1, GemConvention::Literal, rng)?[0])
    })
    .unwrap();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    assert!(within_sigma(mean, 0.25, (3.0f64 / 64.0 / 1e5).sqrt(), 3.0));
}
