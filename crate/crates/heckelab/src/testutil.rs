/// Sorted degree vectors of length `n` with entries in `lo..=hi`.
pub fn grid(n: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for v in &out {
            let start = v.last().copied().unwrap_or(lo);
            for x in start..=hi {
                let mut w = v.clone();
                w.push(x);
                next.push(w);
            }
        }
        out = next;
    }
    out
}
