//! Occupation-word helpers: binomial tables, colex ranking and
//! fixed-popcount enumeration.

/// Pascal triangle up to `n` rows, `table[n][k] = C(n, k)`.
#[derive(Debug, Clone)]
pub struct Binomial {
    table: Vec<Vec<u64>>,
}

impl Binomial {
    pub fn new(n: usize) -> Self {
        let mut table = vec![vec![0u64; n + 2]; n + 2];
        for i in 0..=n + 1 {
            table[i][0] = 1;
            for k in 1..=i {
                table[i][k] = table[i - 1][k - 1] + if k < i { table[i - 1][k] } else { 0 };
            }
        }
        Self { table }
    }

    #[inline]
    pub fn get(&self, n: usize, k: usize) -> u64 {
        if k > n {
            0
        } else {
            self.table[n][k]
        }
    }

    /// Rank of `word` among words of the same popcount in ascending order.
    #[inline]
    pub fn rank(&self, word: u64) -> usize {
        let mut rank = 0u64;
        let mut w = word;
        let mut t = 1;
        while w != 0 {
            let pos = w.trailing_zeros() as usize;
            rank += self.get(pos, t);
            t += 1;
            w &= w - 1;
        }
        rank as usize
    }
}

/// C(n, k) without a table.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// All `n_bits`-bit words with exactly `ones` bits set, ascending.
pub fn words_with_popcount(n_bits: usize, ones: usize) -> Vec<u64> {
    if ones > n_bits {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(binomial(n_bits, ones) as usize);
    if ones == 0 {
        out.push(0);
        return out;
    }
    let limit = 1u64 << n_bits;
    let mut w = (1u64 << ones) - 1;
    while w < limit {
        out.push(w);
        // Gosper's hack
        let c = w & w.wrapping_neg();
        let r = w + c;
        w = (((r ^ w) >> 2) / c) | r;
    }
    out
}

#[inline]
pub fn mask(n_bits: usize) -> u64 {
    if n_bits >= 64 {
        u64::MAX
    } else {
        (1u64 << n_bits) - 1
    }
}
