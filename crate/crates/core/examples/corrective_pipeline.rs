//! The compiler-feedback loop: invalid answers are retried with the parse
//! error in the prompt until they parse or the retry budget runs out.

use tmprob::spec_lang::parse_signature;
use tmprob::tm::{Backend, BackendConfig, FewShotStore, GenerationRequest, InputCase, TMConfig, Tm, TmError};

/// Answers badly on the first attempt and prints each prompt it sees.
struct Flaky;

impl Backend for Flaky {
    fn backend_id(&self) -> &str {
        "flaky"
    }

    fn generate(&self, req: &GenerationRequest<'_>) -> Result<String, TmError> {
        println!("--- sample {} retry {} ---\n{}", req.sample_index, req.retry, req.prompt);
        Ok(if req.retry == 0 { "ensures r == x +;" } else { "ensures r == x + 1;" }.into())
    }
}

fn main() {
    let text = "method Inc(x: int) returns (r: int)";
    let input = InputCase {
        id: "inc".into(),
        docstring: "Adds one to x.".into(),
        signature: parse_signature(text).unwrap(),
        signature_text: text.into(),
        groundtruth: None,
    };
    let mut cfg = TMConfig::new("flaky", BackendConfig::Simulated(Default::default()));
    cfg.sampling.n_samples = 1;
    let tm = Tm::with_backend(cfg, Box::new(Flaky), FewShotStore::default()).unwrap();
    let out = tm.run_pipeline(&input, 0).unwrap();
    println!("=> valid: {}, retries used: {}", out.is_valid(), out.retries_used);
}
