//! Set partitions of `{0, …, k-1}` as restricted growth strings.

/// Bell number `B(k)`, saturating at `u128::MAX`.
pub fn bell(k: usize) -> u128 {
    // Bell triangle.
    let mut row: Vec<u128> = vec![1];
    for _ in 0..k {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let prev = *next.last().unwrap();
            next.push(prev.saturating_add(x));
        }
        row = next;
    }
    row[0]
}

/// All set partitions of a `k`-element set, each given as a block index per
/// element with blocks numbered in order of first appearance.
pub fn set_partitions(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; k];
    let mut maxes = vec![0usize; k];
    loop {
        out.push(rgs.clone());
        // Find rightmost position that can be incremented.
        let mut i = k - 1;
        loop {
            if i == 0 {
                return out;
            }
            if rgs[i] <= maxes[i - 1] {
                break;
            }
            i -= 1;
        }
        rgs[i] += 1;
        maxes[i] = maxes[i - 1].max(rgs[i]);
        for j in i + 1..k {
            rgs[j] = 0;
            maxes[j] = maxes[i];
        }
    }
}

/// Blocks of a restricted growth string.
pub fn blocks(rgs: &[usize]) -> Vec<Vec<usize>> {
    let count = rgs.iter().copied().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); count];
    for (elem, &b) in rgs.iter().enumerate() {
        out[b].push(elem);
    }
    out
}
