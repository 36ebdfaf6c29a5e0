use super::MetricError;
use std::collections::BTreeMap;

/// BLEU-style n-gram precision combined by geometric mean, with add-one
/// smoothing on every precision and a brevity penalty.
pub fn ngram_match<S: AsRef<str>>(
    candidate: &[S],
    reference: &[S],
    max_n: usize,
) -> Result<f64, MetricError> {
    weighted_bleu(candidate, reference, max_n, |_| 1.0)
}

/// Same as [`ngram_match`] but an n-gram whose first token is a keyword
/// counts `keyword_weight` times.
pub fn weighted_ngram_match<S: AsRef<str>>(
    candidate: &[S],
    reference: &[S],
    max_n: usize,
    keyword_weight: f64,
) -> Result<f64, MetricError> {
    if !(keyword_weight.is_finite() && keyword_weight >= 0.0) {
        return Err(MetricError::InvalidKeywordWeight(keyword_weight));
    }
    weighted_bleu(candidate, reference, max_n, |first| {
        if crate::testlang::is_keyword(first) {
            keyword_weight
        } else {
            1.0
        }
    })
}

fn counts<'a>(tokens: &'a [&'a str], n: usize) -> BTreeMap<&'a [&'a str], u64> {
    let mut m = BTreeMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

fn weighted_bleu<S: AsRef<str>>(
    candidate: &[S],
    reference: &[S],
    max_n: usize,
    weight: impl Fn(&str) -> f64,
) -> Result<f64, MetricError> {
    if candidate.is_empty() || reference.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    if max_n == 0 {
        return Err(MetricError::InvalidMaxN);
    }
    let cand: Vec<&str> = candidate.iter().map(AsRef::as_ref).collect();
    let refr: Vec<&str> = reference.iter().map(AsRef::as_ref).collect();
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let c = counts(&cand, n);
        let r = counts(&refr, n);
        let mut matched = 0.0;
        let mut total = 0.0;
        for (gram, &count) in &c {
            let w = weight(gram[0]);
            let clipped = count.min(r.get(gram).copied().unwrap_or(0));
            matched += w * clipped as f64;
            total += w * count as f64;
        }
        log_sum += ((matched + 1.0) / (total + 1.0)).ln();
    }
    let geo = (log_sum / max_n as f64).exp();
    let bp = (1.0 - refr.len() as f64 / cand.len() as f64).exp().min(1.0);
    Ok((bp * geo).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn identical_lists_score_one() {
        let t = toks("Budget b = new Budget ( 5 ) ;");
        assert_eq!(ngram_match(&t, &t, 4).unwrap(), 1.0);
        assert_eq!(weighted_ngram_match(&t, &t, 4, 5.0).unwrap(), 1.0);
        assert_eq!(weighted_ngram_match(&t, &t, 4, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn empty_input_errors() {
        let t = toks("a b");
        let e: Vec<String> = Vec::new();
        assert_eq!(ngram_match(&e, &t, 4), Err(MetricError::EmptyInput));
        assert_eq!(ngram_match(&t, &e, 4), Err(MetricError::EmptyInput));
        assert_eq!(weighted_ngram_match(&t, &e, 4, 5.0), Err(MetricError::EmptyInput));
    }

    #[test]
    fn keyword_weight_one_is_plain_bleu() {
        let a = toks("new Foo ( 1 ) ; assertTrue ( x ) ;");
        let b = toks("new Foo ( 2 ) ; assertFalse ( x ) ; y");
        assert_eq!(
            weighted_ngram_match(&a, &b, 4, 1.0).unwrap(),
            ngram_match(&a, &b, 4).unwrap()
        );
    }

    #[test]
    fn shorter_candidate_is_penalized() {
        let r = toks("a b c d e f g h");
        let c = toks("a b c d");
        let s = ngram_match(&c, &r, 4).unwrap();
        assert!(s < 0.5, "{s}");
    }
}
