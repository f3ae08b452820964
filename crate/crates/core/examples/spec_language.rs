//! Parse, typecheck, print and evaluate a specification, then compare two
//! specs on the bounded domain and emit the SMT-LIB query for them.

use std::collections::BTreeMap;
use tmprob::spec_lang::{
    equivalence_counterexample, evaluate, format_env, parse_signature, parse_spec, to_smtlib, EvaluationBounds, Value,
};

fn main() {
    let sig = parse_signature("method Abs(x: int) returns (y: int)").unwrap();
    let spec = parse_spec("ensures x >= 0 ==> y == x; ensures x < 0 ==> y == -x;", &sig).unwrap();
    println!("{spec}");

    let bounds = EvaluationBounds::default();
    let env = BTreeMap::from([("x".to_string(), Value::Int(-2)), ("y".to_string(), Value::Int(2))]);
    for post in &spec.postconditions {
        println!("{post}  at {}  ->  {:?}", format_env(&env), evaluate(post, &env, &bounds));
    }

    match parse_spec("ensures y == x +;", &sig) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }

    let other = parse_spec("ensures y >= 0; ensures y == x || y == -x;", &sig).unwrap();
    match equivalence_counterexample(&spec, &other, &sig, &bounds).unwrap() {
        None => println!("equivalent within {bounds}"),
        Some(d) => println!("differ at {}", format_env(d.env())),
    }
    println!("{}", to_smtlib(&spec, &other, &sig));
}
