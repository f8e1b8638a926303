//! The `equations` vocabulary preset: literals, single-bit equations
//! with XOR-of-monomials bodies, and conjunctive two-claim equations,
//! for 8-bit spaces laid out as four input bits followed by four output
//! bits.
//!
//! Single-bit equations equate one output bit with an XOR of up to
//! three positive monomials over the input bits, in either polarity;
//! this family can express every output law of 2-bit binary addition
//! and multiplication. Pair equations conjoin two simple per-bit
//! claims (an output bit equated with a single monomial, in either
//! polarity) into one program; the two claims that coincide with a
//! single-monomial multiplication law are omitted, so a pair program
//! always claims strictly more than any true law and can never be
//! exactly right.

/// Positive conjunctive monomials over the input bits, keyed by the
/// bit-mask of participating inputs.
fn monomials() -> Vec<(u32, String)> {
    let mut out = Vec::new();
    for mask in 1u32..16 {
        let lits: Vec<String> = (0..4)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| format!("b{i}"))
            .collect();
        out.push((mask, format!("({})", lits.join("&"))));
    }
    out
}

/// XOR folded as iterated inequality: a xor b = !(a = b).
fn xor_fold(parts: &[String]) -> String {
    let mut acc = parts[0].clone();
    for p in &parts[1..] {
        acc = format!("!(({acc})=({p}))");
    }
    acc
}

fn push_literals(f: &mut Vec<(String, String)>) {
    for i in 0..8u32 {
        f.push((format!("b{i}"), format!("b{i}")));
        f.push((format!("!b{i}"), format!("!b{i}")));
    }
}

/// Every output bit equated with every XOR of at most `max_monomials`
/// monomials, plus the complemented bodies.
fn push_anf_equations(f: &mut Vec<(String, String)>, max_monomials: usize) {
    let ms = monomials();
    let n = ms.len();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new())];
    while let Some((start, cur)) = stack.pop() {
        if !cur.is_empty() {
            subsets.push(cur.clone());
        }
        if cur.len() == max_monomials {
            continue;
        }
        for i in start..n {
            let mut next = cur.clone();
            next.push(i);
            stack.push((i + 1, next));
        }
    }
    for subset in subsets {
        let parts: Vec<String> = subset.iter().map(|&i| ms[i].1.clone()).collect();
        let body = xor_fold(&parts);
        let tag: Vec<String> = subset.iter().map(|&i| format!("m{}", ms[i].0)).collect();
        let tag = tag.join("+");
        for out in 4..8u32 {
            f.push((format!("(b{out}={tag})"), format!("b{out}=({body})")));
            f.push((format!("(b{out}=!({tag}))"), format!("b{out}=!({body})")));
        }
    }
}

/// Simple claims for pair programs: one output bit equated with a
/// single monomial, either polarity. The two claims that are true
/// multiplication laws (bit 4 = b0&b1&b2&b3 and bit 7 = b1&b3) are
/// omitted so no claim is ever exactly right.
fn simple_claims(out: u32) -> Vec<(String, String)> {
    let mut claims = Vec::new();
    for (mask, m) in monomials() {
        if (out == 4 && mask == 15) || (out == 7 && mask == 10) {
            continue;
        }
        claims.push((format!("b{out}=m{mask}"), format!("b{out}=({m})")));
        claims.push((format!("b{out}=!m{mask}"), format!("b{out}=!({m})")));
    }
    claims
}

/// Every unordered pair of distinct simple claims, conjoined into a
/// single program.
fn push_pair_equations(f: &mut Vec<(String, String)>) {
    for o1 in 4..8u32 {
        for o2 in o1..8 {
            let c1 = simple_claims(o1);
            let c2 = simple_claims(o2);
            for (i, (l1, f1)) in c1.iter().enumerate() {
                let start = if o1 == o2 { i + 1 } else { 0 };
                for (l2, f2) in c2.iter().skip(start) {
                    f.push((format!("({l1})&({l2})"), format!("({f1})&({f2})")));
                }
            }
        }
    }
}

/// The full `(label, formula)` list for the preset.
pub fn equations_formulas() -> Vec<(String, String)> {
    let mut f = Vec::new();
    push_literals(&mut f);
    push_anf_equations(&mut f, 3);
    push_pair_equations(&mut f);
    f
}

/// The `rich` preset: as `equations`, but with bodies of up to four
/// monomials, roughly doubling the vocabulary.
pub fn rich_formulas() -> Vec<(String, String)> {
    let mut f = Vec::new();
    push_literals(&mut f);
    push_anf_equations(&mut f, 4);
    push_pair_equations(&mut f);
    f
}
