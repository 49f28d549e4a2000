#![allow(dead_code)]

use std::collections::BTreeMap;

use chernoff_lab::operator::{ComplexMatrix, HermitianOperator};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Hermitian matrix with entries uniform in the unit box, scaled by `scale`.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize, scale: f64) -> HermitianOperator {
    let mut rows = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        rows[i * dim + i] = Complex64::new(scale * rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..dim {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
            rows[i * dim + j] = z;
            rows[j * dim + i] = z.conj();
        }
    }
    HermitianOperator::new(ComplexMatrix::from_rows(dim, &rows).unwrap()).unwrap()
}

/// Largest entrywise difference restricted to the top-left `k x k` block.
pub fn block_diff(a: &ComplexMatrix, b: &ComplexMatrix, k: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            worst = worst.max((a.get(i, j) - b.get(i, j)).norm());
        }
    }
    worst
}

/// Word in the noncommuting letters `q`, `p` with a complex weight.
type Word = (Vec<u8>, Complex64);

/// Rewrites a linear combination of words into normal order (all `q` left of
/// all `p`) using `pq = qp - i hbar`. Returns `(a, b) -> coefficient of q^a p^b`.
pub fn normal_order(words: Vec<Word>, hbar: f64) -> BTreeMap<(usize, usize), Complex64> {
    let mut out = BTreeMap::new();
    let mut stack = words;
    while let Some((w, c)) = stack.pop() {
        match w.windows(2).position(|x| x == b"pq") {
            None => {
                let a = w.iter().filter(|&&l| l == b'q').count();
                *out.entry((a, w.len() - a)).or_insert(Complex64::new(0.0, 0.0)) += c;
            }
            Some(i) => {
                let mut swapped = w.clone();
                swapped.swap(i, i + 1);
                stack.push((swapped, c));
                let mut contracted = w[..i].to_vec();
                contracted.extend_from_slice(&w[i + 2..]);
                stack.push((contracted, c * Complex64::new(0.0, -hbar)));
            }
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn sandwich(k: usize, a: usize, b: usize) -> Vec<u8> {
    let mut w = vec![b'q'; k];
    w.extend(std::iter::repeat_n(b'p', b));
    w.extend(std::iter::repeat_n(b'q', a - k));
    w
}

/// Weyl ordering of `q^a p^b` as a combination of words.
pub fn weyl_words(a: usize, b: usize) -> Vec<Word> {
    (0..=a)
        .map(|k| {
            let w = binomial(a, k) / 2f64.powi(a as i32);
            (sandwich(k, a, b), Complex64::new(w, 0.0))
        })
        .collect()
}

/// Born–Jordan ordering of `q^a p^b` as a combination of words.
pub fn born_jordan_words(a: usize, b: usize) -> Vec<Word> {
    (0..=a)
        .map(|k| (sandwich(k, a, b), Complex64::new(1.0 / (a + 1) as f64, 0.0)))
        .collect()
}

/// Normal-ordered `Weyl(q^a p^b) - BornJordan(q^a p^b)`.
pub fn ordering_difference(a: usize, b: usize, hbar: f64) -> BTreeMap<(usize, usize), Complex64> {
    let mut words = weyl_words(a, b);
    words.extend(born_jordan_words(a, b).into_iter().map(|(w, c)| (w, -c)));
    normal_order(words, hbar)
}
