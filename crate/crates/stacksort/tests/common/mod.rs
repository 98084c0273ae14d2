//! Deliberately naive reference implementations, kept independent of the
//! library's code paths: standardization re-sorts from scratch, containment
//! re-standardizes every window or subsequence, and the reference machine
//! rescans the whole stack after every hypothetical push.

#![allow(dead_code)] // each integration test crate uses a subset

/// Standardization by sorting a copy and looking ranks up.
pub fn naive_std(word: &[u8]) -> Vec<u8> {
    let mut sorted: Vec<u8> = word.to_vec();
    sorted.sort_unstable();
    word.iter()
        .map(|v| (sorted.iter().position(|s| s == v).unwrap() + 1) as u8)
        .collect()
}

/// Consecutive containment by standardizing every window from scratch.
pub fn naive_contains_consecutive(host: &[u8], pat: &[u8]) -> bool {
    let k = pat.len();
    if k > host.len() {
        return false;
    }
    (0..=host.len() - k).any(|i| naive_std(&host[i..i + k]) == pat)
}

/// Classical containment by standardizing every k-subsequence from scratch.
pub fn naive_contains_classical(host: &[u8], pat: &[u8]) -> bool {
    let (n, k) = (host.len(), pat.len());
    if k > n {
        return false;
    }
    // odometer over index combinations
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let sub: Vec<u8> = idx.iter().map(|&i| host[i]).collect();
        if naive_std(&sub) == pat {
            return true;
        }
        let mut d = k;
        loop {
            if d == 0 {
                return false;
            }
            d -= 1;
            if idx[d] != d + n - k {
                break;
            }
            if d == 0 {
                return false;
            }
        }
        idx[d] += 1;
        for j in d + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Which reference machine to run.
pub enum NaiveKind<'a> {
    West,
    Classical(&'a [u8]),
    Consecutive(&'a [&'a [u8]]),
}

fn naive_push_legal(stack: &[u8], next: u8, kind: &NaiveKind) -> bool {
    match kind {
        NaiveKind::West => stack.last().map_or(true, |&top| next < top),
        NaiveKind::Classical(pat) => {
            let mut top_to_bottom = vec![next];
            top_to_bottom.extend(stack.iter().rev().copied());
            !naive_contains_classical(&top_to_bottom, pat)
        }
        NaiveKind::Consecutive(pats) => {
            let mut top_to_bottom = vec![next];
            top_to_bottom.extend(stack.iter().rev().copied());
            pats.iter().all(|pat| !naive_contains_consecutive(&top_to_bottom, pat))
        }
    }
}

/// One full reference pass: output only.
pub fn naive_run(input: &[u8], kind: &NaiveKind) -> Vec<u8> {
    let n = input.len();
    let mut stack: Vec<u8> = Vec::new();
    let mut out: Vec<u8> = Vec::new();
    let mut i = 0;
    while out.len() < n {
        if i < n && naive_push_legal(&stack, input[i], kind) {
            stack.push(input[i]);
            i += 1;
        } else {
            out.push(stack.pop().expect("pop from nonempty stack"));
        }
    }
    out
}

/// All length-k permutations as entry vectors, lexicographic.
pub fn all_patterns(k: u8) -> Vec<Vec<u8>> {
    stacksort::perm::enumerate_sn(k)
        .unwrap()
        .map(|p| p.entries().to_vec())
        .collect()
}
