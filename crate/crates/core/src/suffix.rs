//! Suffix automaton, used to count distinct factors of each length.

use std::collections::HashMap;

struct State {
    len: u32,
    link: i32,
    next: HashMap<u8, usize>,
}

/// Number of distinct factors of `word` for every length.
///
/// Returns a vector `counts` with `counts[l]` the number of distinct factors
/// of length `l`, for `0 <= l <= word.len()` (`counts[0]` is 1, the empty
/// factor). Each automaton state represents the factors in one contiguous
/// length range, so a difference array over those ranges yields all counts in
/// linear time.
pub(crate) fn distinct_factor_counts(word: &[u8]) -> Vec<u64> {
    let n = word.len();
    let mut states: Vec<State> = Vec::with_capacity(2 * n + 2);
    states.push(State {
        len: 0,
        link: -1,
        next: HashMap::new(),
    });
    let mut last = 0usize;
    for &c in word {
        let cur = states.len();
        let cur_len = states[last].len + 1;
        states.push(State {
            len: cur_len,
            link: -1,
            next: HashMap::new(),
        });
        let mut p = last as i32;
        while p >= 0 && !states[p as usize].next.contains_key(&c) {
            states[p as usize].next.insert(c, cur);
            p = states[p as usize].link;
        }
        if p < 0 {
            states[cur].link = 0;
        } else {
            let q = states[p as usize].next[&c];
            if states[p as usize].len + 1 == states[q].len {
                states[cur].link = q as i32;
            } else {
                let clone = states.len();
                let clone_state = State {
                    len: states[p as usize].len + 1,
                    link: states[q].link,
                    next: states[q].next.clone(),
                };
                states.push(clone_state);
                while p >= 0 && states[p as usize].next.get(&c) == Some(&q) {
                    states[p as usize].next.insert(c, clone);
                    p = states[p as usize].link;
                }
                states[q].link = clone as i32;
                states[cur].link = clone as i32;
            }
        }
        last = cur;
    }

    let mut diff = vec![0i64; n + 2];
    for v in 1..states.len() {
        let link = states[v].link;
        let min_len = if link >= 0 {
            states[link as usize].len + 1
        } else {
            1
        };
        diff[min_len as usize] += 1;
        diff[states[v].len as usize + 1] -= 1;
    }
    let mut counts = vec![0u64; n + 1];
    counts[0] = 1;
    let mut acc = 0i64;
    for (l, slot) in counts.iter_mut().enumerate().skip(1) {
        acc += diff[l];
        *slot = acc as u64;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn brute_force(word: &[u8]) -> Vec<u64> {
        let n = word.len();
        let mut counts = vec![0u64; n + 1];
        counts[0] = 1;
        for l in 1..=n {
            let set: HashSet<&[u8]> = (0..=n - l).map(|i| &word[i..i + l]).collect();
            counts[l] = set.len() as u64;
        }
        counts
    }

    #[test]
    fn matches_brute_force_on_fixed_words() {
        let words: &[&[u8]] = &[
            b"abab",
            b"1100",
            b"aaaaa",
            b"abcabc",
            b"mississippi",
            b"abracadabra",
            b"a",
            b"ab",
            b"10100101",
            b"aababbabbbabbbba",
        ];
        for &word in words {
            assert_eq!(
                distinct_factor_counts(word),
                brute_force(word),
                "word {word:?}"
            );
        }
    }

    #[test]
    fn matches_brute_force_on_generated_words() {
        // Small deterministic pseudo-random corpus over alphabets of 2..4.
        let mut seed = 0x243f6a8885a308d3u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..60 {
            let len = (next() % 40 + 1) as usize;
            let sigma = (next() % 3 + 2) as u8;
            let word: Vec<u8> = (0..len)
                .map(|_| b'a' + (next() % u64::from(sigma)) as u8)
                .collect();
            assert_eq!(
                distinct_factor_counts(&word),
                brute_force(&word),
                "word {word:?}"
            );
        }
    }

    #[test]
    fn empty_word_has_only_the_empty_factor() {
        assert_eq!(distinct_factor_counts(b""), vec![1]);
    }
}
