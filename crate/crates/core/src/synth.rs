//! Seeded synthetic data: Gaussian blobs, two moons and noisy sine series.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{Dataset, Label, Mode};

/// Two isotropic 2-D Gaussian blobs with unit spread whose centers lie
/// `separation` standard deviations apart. Every point is labeled with its
/// blob; points alternate between the blobs.
pub fn two_blobs<R: Rng>(n: usize, separation: f64, rng: &mut R) -> Dataset {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 2;
        let cx = c as f64 * separation;
        rows.push(vec![cx + normal.sample(rng), normal.sample(rng)]);
        labels.push(Some(Label::Class(c)));
    }
    Dataset::new(rows, labels, Mode::Classification { classes: 2 })
        .expect("generated data is valid")
        .with_class_names(vec!["a".into(), "b".into()])
}

/// Two interleaving half circles with Gaussian jitter.
pub fn two_moons<R: Rng>(n: usize, noise: f64, rng: &mut R) -> Dataset {
    let jitter = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).unwrap();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 2;
        let t = PI * rng.gen::<f64>();
        let (x, y) = if c == 0 {
            (t.cos(), t.sin())
        } else {
            (1.0 - t.cos(), 0.5 - t.sin())
        };
        rows.push(vec![x + jitter.sample(rng), y + jitter.sample(rng)]);
        labels.push(Some(Label::Class(c)));
    }
    Dataset::new(rows, labels, Mode::Classification { classes: 2 })
        .expect("generated data is valid")
        .with_class_names(vec!["upper".into(), "lower".into()])
}

/// `sin(2πt / period)` plus Gaussian noise.
pub fn noisy_sine<R: Rng>(len: usize, period: f64, noise: f64, rng: &mut R) -> Vec<f64> {
    let jitter = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).unwrap();
    (0..len)
        .map(|t| (2.0 * PI * t as f64 / period).sin() + jitter.sample(rng))
        .collect()
}

/// Keeps the labels of a stratified random `fraction` of every class (at
/// least one point per class) and returns the full labels as ground truth.
pub fn mask_labels<R: Rng>(data: &Dataset, fraction: f64, rng: &mut R) -> (Dataset, Vec<Option<Label>>) {
    let truth = data.labels().to_vec();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); data.mode().width()];
    let mut regression = Vec::new();
    for (i, l) in truth.iter().enumerate() {
        match l {
            Some(Label::Class(c)) => by_class[*c].push(i),
            Some(Label::Value(_)) => regression.push(i),
            None => {}
        }
    }
    by_class.push(regression);
    let mut keep = vec![false; data.len()];
    for mut members in by_class.into_iter().filter(|m| !m.is_empty()) {
        let k = ((members.len() as f64 * fraction).round() as usize).clamp(1, members.len());
        members.shuffle(rng);
        for &i in &members[..k] {
            keep[i] = true;
        }
    }
    let mut masked = data.clone();
    masked.retain_labels(|i| keep[i]);
    (masked, truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_seeded() {
        let a = two_blobs(50, 4.0, &mut ChaCha8Rng::seed_from_u64(3));
        let b = two_blobs(50, 4.0, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        let s = noisy_sine(100, 20.0, 0.1, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(s.len(), 100);
    }

    #[test]
    fn mask_is_stratified() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data = two_moons(200, 0.1, &mut rng);
        let (masked, truth) = mask_labels(&data, 0.1, &mut rng);
        assert_eq!(masked.labeled_count(), 20);
        assert_eq!(truth.len(), 200);
        let zeros = masked
            .labels()
            .iter()
            .filter(|l| **l == Some(Label::Class(0)))
            .count();
        assert_eq!(zeros, 10);
    }
}
