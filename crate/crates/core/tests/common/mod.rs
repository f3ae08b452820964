//! Test-side reference implementations: a tree-walking interpreter written
//! against the AST directly, brute-force domain enumeration, and seeded
//! generators of well-typed formulas and specs.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use tmprob::spec_lang::{
    BinOp, EvaluationBounds, Expr, ExprKind, MistakeLabel, Param, Quantifier, Signature, SpecPair, Type, UnaryOp,
    Value,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RVal {
    I(i64),
    B(bool),
    S(Vec<i64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RErr {
    DivZero,
    Index,
    Overflow,
}

impl RVal {
    fn i(&self) -> i64 {
        match self {
            RVal::I(v) => *v,
            other => panic!("expected int, got {other:?}"),
        }
    }
    fn b(&self) -> bool {
        match self {
            RVal::B(v) => *v,
            other => panic!("expected bool, got {other:?}"),
        }
    }
}

/// Floor-style division with a non-negative remainder.
fn euclid(a: i64, b: i64) -> Result<(i64, i64), RErr> {
    if b == 0 {
        return Err(RErr::DivZero);
    }
    let mut q = a.checked_div(b).ok_or(RErr::Overflow)?;
    let mut r = a.checked_rem(b).ok_or(RErr::Overflow)?;
    if r < 0 {
        if b > 0 {
            q -= 1;
            r += b;
        } else {
            q += 1;
            r -= b;
        }
    }
    Ok((q, r))
}

pub fn ref_eval(e: &Expr, env: &BTreeMap<String, Value>, scope: &mut Vec<(String, i64)>, range: (i64, i64)) -> Result<RVal, RErr> {
    Ok(match &e.kind {
        ExprKind::Int(v) => RVal::I(*v),
        ExprKind::Bool(b) => RVal::B(*b),
        ExprKind::Var(n) => {
            if let Some((_, v)) = scope.iter().rev().find(|(s, _)| s == n) {
                RVal::I(*v)
            } else {
                match env.get(n).unwrap_or_else(|| panic!("unbound {n}")) {
                    Value::Int(v) => RVal::I(*v),
                    Value::Bool(b) => RVal::B(*b),
                    Value::Seq(s) => RVal::S(s.clone()),
                }
            }
        }
        ExprKind::Unary(UnaryOp::Not, a) => RVal::B(!ref_eval(a, env, scope, range)?.b()),
        ExprKind::Unary(UnaryOp::Neg, a) => RVal::I(ref_eval(a, env, scope, range)?.i().checked_neg().ok_or(RErr::Overflow)?),
        ExprKind::Len(a) => match ref_eval(a, env, scope, range)? {
            RVal::S(s) => RVal::I(s.len() as i64),
            other => panic!("len of {other:?}"),
        },
        ExprKind::Index(a, i) => {
            let s = match ref_eval(a, env, scope, range)? {
                RVal::S(s) => s,
                other => panic!("index into {other:?}"),
            };
            let i = ref_eval(i, env, scope, range)?.i();
            if i < 0 || i >= s.len() as i64 {
                return Err(RErr::Index);
            }
            RVal::I(s[i as usize])
        }
        ExprKind::Quant(q, v, body) => {
            let mut result = matches!(q, Quantifier::Forall);
            for k in range.0..=range.1 {
                scope.push((v.clone(), k));
                let r = ref_eval(body, env, scope, range);
                scope.pop();
                let b = r?.b();
                if matches!(q, Quantifier::Forall) {
                    result = result && b;
                } else {
                    result = result || b;
                }
            }
            RVal::B(result)
        }
        ExprKind::Binary(op, l, r) => {
            let mut ev = |x: &Expr| ref_eval(x, env, scope, range);
            match op {
                BinOp::And => RVal::B(ev(l)?.b() && ev(r)?.b()),
                BinOp::Or => RVal::B(ev(l)?.b() || ev(r)?.b()),
                BinOp::Implies => RVal::B(!ev(l)?.b() || ev(r)?.b()),
                BinOp::Iff => {
                    let a = ev(l)?.b();
                    RVal::B(a == ev(r)?.b())
                }
                BinOp::Eq => {
                    let a = ev(l)?;
                    RVal::B(a == ev(r)?)
                }
                BinOp::Ne => {
                    let a = ev(l)?;
                    RVal::B(a != ev(r)?)
                }
                _ => {
                    let a = ev(l)?.i();
                    let b = ev(r)?.i();
                    match op {
                        BinOp::Lt => RVal::B(a < b),
                        BinOp::Le => RVal::B(a <= b),
                        BinOp::Gt => RVal::B(a > b),
                        BinOp::Ge => RVal::B(a >= b),
                        BinOp::Add => RVal::I(a.checked_add(b).ok_or(RErr::Overflow)?),
                        BinOp::Sub => RVal::I(a.checked_sub(b).ok_or(RErr::Overflow)?),
                        BinOp::Mul => RVal::I(a.checked_mul(b).ok_or(RErr::Overflow)?),
                        BinOp::Div => RVal::I(euclid(a, b)?.0),
                        BinOp::Mod => RVal::I(euclid(a, b)?.1),
                        _ => unreachable!(),
                    }
                }
            }
        }
    })
}

pub fn ref_truth(f: &Expr, env: &BTreeMap<String, Value>, bounds: &EvaluationBounds) -> Result<bool, RErr> {
    Ok(ref_eval(f, env, &mut Vec::new(), bounds.quantifier_range())?.b())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tri {
    T,
    F,
    E,
}

/// Conjunction, evaluated left to right; the first error or false decides.
pub fn ref_conj(fs: &[Expr], env: &BTreeMap<String, Value>, bounds: &EvaluationBounds) -> Tri {
    for f in fs {
        match ref_truth(f, env, bounds) {
            Err(_) => return Tri::E,
            Ok(false) => return Tri::F,
            Ok(true) => {}
        }
    }
    Tri::T
}

/// All values of `ty` within bounds, built independently of the library.
pub fn ref_domain(ty: Type, bounds: &EvaluationBounds) -> Vec<Value> {
    let b = bounds.int_bound as i64;
    match ty {
        Type::Int => (-b..=b).map(Value::Int).collect(),
        Type::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Type::IntSeq => {
            let mut out = Vec::new();
            for len in 0..=bounds.max_seq_len as usize {
                let width = (2 * b + 1) as usize;
                let total = width.pow(len as u32);
                for mut code in 0..total {
                    let mut s = vec![0; len];
                    for slot in s.iter_mut().rev() {
                        *slot = (code % width) as i64 - b;
                        code /= width;
                    }
                    out.push(Value::Seq(s));
                }
            }
            out
        }
    }
}

/// Cartesian product of the domains of `params`.
pub fn ref_envs(params: &[Param], bounds: &EvaluationBounds) -> Vec<BTreeMap<String, Value>> {
    let mut envs = vec![BTreeMap::new()];
    for p in params {
        let dom = ref_domain(p.ty, bounds);
        envs = envs
            .into_iter()
            .flat_map(|e| {
                dom.iter().map(move |v| {
                    let mut e = e.clone();
                    e.insert(p.name.clone(), v.clone());
                    e
                })
            })
            .collect();
    }
    envs
}

/// `hyp ∧ lhs ⇒ rhs` over every environment of the signature's variables,
/// with the one-sided-error rule.
pub fn brute_implies(hyp: &[Expr], lhs: &[Expr], rhs: &[Expr], sig: &Signature, bounds: &EvaluationBounds) -> bool {
    let vars: Vec<Param> = sig.variables().cloned().collect();
    ref_envs(&vars, bounds).iter().all(|env| {
        if ref_conj(hyp, env, bounds) != Tri::T {
            return true;
        }
        match (ref_conj(lhs, env, bounds), ref_conj(rhs, env, bounds)) {
            (Tri::E, Tri::E) => true,
            (Tri::E, _) | (_, Tri::E) => false,
            (Tri::T, Tri::F) => false,
            _ => true,
        }
    })
}

pub fn brute_equivalent(s1: &SpecPair, s2: &SpecPair, sig: &Signature, bounds: &EvaluationBounds) -> bool {
    let rets = ref_envs(&sig.returns, bounds);
    ref_envs(&sig.params, bounds).iter().all(|penv| {
        let (a, b) = (ref_conj(&s1.preconditions, penv, bounds), ref_conj(&s2.preconditions, penv, bounds));
        if a != b {
            return false;
        }
        if a != Tri::T {
            return true;
        }
        rets.iter().all(|renv| {
            let mut env = penv.clone();
            env.extend(renv.clone());
            ref_conj(&s1.postconditions, &env, bounds) == ref_conj(&s2.postconditions, &env, bounds)
        })
    })
}

/// Seeded generator of well-typed formulas over `x, y: int`, `p: bool`,
/// `a, b: seq<int>`.
pub struct FormulaGen {
    pub rng: ChaCha8Rng,
    scope: Vec<String>,
    fresh: usize,
    pub allow_quantifiers: bool,
}

pub const GEN_INTS: [&str; 2] = ["x", "y"];
pub const GEN_SEQS: [&str; 2] = ["a", "b"];

impl FormulaGen {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            scope: Vec::new(),
            fresh: 0,
            allow_quantifiers: true,
        }
    }

    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.rng.random_range(0..xs.len())]
    }

    pub fn int(&mut self, depth: u32) -> Expr {
        if depth == 0 || self.rng.random_bool(0.3) {
            let n_atoms = 4 + usize::from(!self.scope.is_empty());
            return match self.rng.random_range(0..n_atoms) {
                0 => Expr::int(self.rng.random_range(0..4)),
                1 => Expr::var(*self.pick(&GEN_INTS)),
                2 => Expr::len(Expr::var(*self.pick(&GEN_SEQS))),
                3 => Expr::int(self.rng.random_range(0..3)),
                _ => {
                    let v = self.pick(&self.scope.clone()).clone();
                    Expr::var(v)
                }
            };
        }
        match self.rng.random_range(0..4) {
            0 => Expr::unary(UnaryOp::Neg, self.int(depth - 1)),
            1 => Expr::index(Expr::var(*self.pick(&GEN_SEQS)), self.int(depth - 1)),
            _ => {
                let op = *self.pick(&[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Mod]);
                Expr::binary(op, self.int(depth - 1), self.int(depth - 1))
            }
        }
    }

    pub fn boolean(&mut self, depth: u32) -> Expr {
        if depth == 0 || self.rng.random_bool(0.2) {
            return match self.rng.random_range(0..4) {
                0 => Expr::boolean(self.rng.random_bool(0.5)),
                1 => Expr::var("p"),
                2 => {
                    let op = *self.pick(&[BinOp::Eq, BinOp::Ne]);
                    Expr::binary(op, Expr::var("a"), Expr::var("b"))
                }
                _ => self.cmp(0),
            };
        }
        let max = if self.allow_quantifiers && self.scope.len() < 2 { 5 } else { 4 };
        match self.rng.random_range(0..max) {
            0 => Expr::unary(UnaryOp::Not, self.boolean(depth - 1)),
            1 | 2 => {
                let op = *self.pick(&[BinOp::And, BinOp::Or, BinOp::Implies, BinOp::Iff]);
                Expr::binary(op, self.boolean(depth - 1), self.boolean(depth - 1))
            }
            3 => self.cmp(depth - 1),
            _ => {
                let v = format!("k{}", self.fresh);
                self.fresh += 1;
                self.scope.push(v.clone());
                let body = self.boolean(depth - 1);
                self.scope.pop();
                let q = *self.pick(&[Quantifier::Forall, Quantifier::Exists]);
                Expr::quant(q, v, body)
            }
        }
    }

    fn cmp(&mut self, depth: u32) -> Expr {
        let op = *self.pick(&[BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge]);
        Expr::binary(op, self.int(depth), self.int(depth))
    }

    pub fn env(&mut self) -> BTreeMap<String, Value> {
        let mut env = BTreeMap::new();
        for v in GEN_INTS {
            env.insert(v.to_string(), Value::Int(self.rng.random_range(-3..=3)));
        }
        env.insert("p".into(), Value::Bool(self.rng.random_bool(0.5)));
        for v in GEN_SEQS {
            let len = self.rng.random_range(0..=3);
            env.insert(v.to_string(), Value::Seq((0..len).map(|_| self.rng.random_range(-3..=3)).collect()));
        }
        env
    }
}

/// Small signature used for randomized spec pairs.
pub fn spec_sig() -> Signature {
    tmprob::spec_lang::parse_signature("method M(x: int, a: seq<int>) returns (r: int)").unwrap()
}

/// Clause groups; texts within a group are equivalent, so random specs
/// collide semantically often.
const PRE_GROUPS: &[&[&str]] = &[&["x >= 0", "0 <= x", "!(x < 0)"], &["|a| > 0", "|a| != 0"], &["x != 0"], &["true", "x * x >= 0"]];
const POST_GROUPS: &[&[&str]] = &[
    &["r == x + 1", "r - 1 == x", "x + 1 == r"],
    &["r > x", "r >= x + 1", "!(r <= x)"],
    &["r == x * 2", "r == x + x"],
    &["r == |a|", "|a| == r"],
    &["r >= 0", "!(r < 0)"],
    &["exists i :: 0 <= i < |a| && a[i] == r"],
    &["forall i :: 0 <= i < |a| ==> a[i] <= r", "!(exists i :: 0 <= i < |a| && a[i] > r)"],
    &["|a| > 0 ==> r == a[0]"],
    &["r == x / 2"],
    &["true", "r == r"],
];

/// Which clause groups a random spec uses.
#[derive(Debug, Clone)]
pub struct SpecShape {
    pre: Vec<usize>,
    post: Vec<usize>,
}

impl SpecShape {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        Self {
            pre: (0..rng.random_range(0..=1)).map(|_| rng.random_range(0..PRE_GROUPS.len())).collect(),
            post: (0..rng.random_range(1..=2)).map(|_| rng.random_range(0..POST_GROUPS.len())).collect(),
        }
    }

    /// Spec text using a random member of each group.
    pub fn render(&self, rng: &mut ChaCha8Rng) -> String {
        let mut pick = |g: &[&str]| g[rng.random_range(0..g.len())].to_string();
        let mut parts: Vec<String> = self.pre.iter().map(|g| format!("requires {};", pick(PRE_GROUPS[*g]))).collect();
        parts.extend(self.post.iter().map(|g| format!("ensures {};", pick(POST_GROUPS[*g]))));
        parts.join("\n")
    }

    pub fn spec(&self, rng: &mut ChaCha8Rng) -> SpecPair {
        tmprob::spec_lang::parse_spec(&self.render(rng), &spec_sig()).unwrap()
    }
}

/// Partition by union-find over all pairs, with invalid samples kept apart.
pub fn union_find_partition(n: usize, same: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut c = i;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if same(i, j) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}

/// Spec texts for `method Inc(x: int) returns (r: int)`, some equivalent,
/// some invalid.
pub const SAMPLE_POOL: &[&str] = &[
    "ensures r == x + 1;",
    "ensures r - 1 == x;",
    "ensures x + 1 == r;",
    "ensures r > x;",
    "ensures r >= x + 1;",
    "ensures !(r <= x);",
    "ensures r == x + x;",
    "ensures r == 2 * x;",
    "requires x >= 0;\nensures r == x + 1;",
    "requires 0 <= x;\nensures 1 + x == r;",
    "ensures r ==;",
    "ensures (r;",
    "ensures q == x;",
];

pub fn inc_sig() -> Signature {
    tmprob::spec_lang::parse_signature("method Inc(x: int) returns (r: int)").unwrap()
}

/// Mistake label computed by enumeration with the reference interpreter.
pub fn brute_label(cand: &SpecPair, gt: &SpecPair, sig: &Signature, b: &EvaluationBounds) -> MistakeLabel {
    use MistakeLabel::*;
    let pick = |fwd: bool, back: bool, weak, strong, wrong| match (fwd, back) {
        (true, true) => None,
        (true, false) => Some(weak),
        (false, true) => Some(strong),
        (false, false) => Some(wrong),
    };
    let pre = pick(
        brute_implies(&[], &gt.preconditions, &cand.preconditions, sig, b),
        brute_implies(&[], &cand.preconditions, &gt.preconditions, sig, b),
        WeakPre,
        StrongPre,
        IncorrectPre,
    );
    let post = pick(
        brute_implies(&gt.preconditions, &gt.postconditions, &cand.postconditions, sig, b),
        brute_implies(&gt.preconditions, &cand.postconditions, &gt.postconditions, sig, b),
        WeakPost,
        StrongPost,
        IncorrectPost,
    );
    pre.or(post).unwrap_or(Equivalent)
}

/// Minimal chat-completions server. The first request is answered with a
/// 503 to exercise the retry path.
pub fn mock_server() -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let calls = Arc::new(AtomicUsize::new(0));
    let counter = calls.clone();
    std::thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            let counter = counter.clone();
            std::thread::spawn(move || serve(stream, &counter));
        }
    });
    (url, calls)
}

fn serve(stream: TcpStream, calls: &AtomicUsize) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut len = 0usize;
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        if line == "\r\n" {
            break;
        }
        if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
            len = v.trim().parse().unwrap_or(0);
        }
    }
    let mut body = vec![0; len];
    if reader.read_exact(&mut body).is_err() {
        return;
    }
    let n = calls.fetch_add(1, Ordering::SeqCst);
    let req: serde_json::Value = serde_json::from_slice(&body).unwrap_or_default();
    let prompt = req["messages"][0]["content"].as_str().unwrap_or("");
    let (status, payload) = if n == 0 {
        ("503 Service Unavailable", "{\"error\":\"warming up\"}".to_string())
    } else {
        let answers: &[&str] = if prompt.contains("method Double") {
            &["ensures r == 2 * x;", "ensures r == x + x;", "ensures r >= x;"]
        } else {
            &["ensures r == x + 1;", "```\nensures r - 1 == x;\n```", "ensures r > x;", "ensures r ==;"]
        };
        let content = answers[n % answers.len()];
        (
            "200 OK",
            serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string(),
        )
    };
    let mut w = stream;
    let _ = write!(
        w,
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    );
}
