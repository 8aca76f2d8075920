use proptest::prelude::*;
use speakable::demo::{build_demo_registry, Home};
use speakable::matching::{match_parameters, ValueCache};
use speakable::scoring::{adjusted_score, score_command};
use speakable::text::tokenize;
use speakable::{resolve, Registry, ResolutionResult, Via};

const WORDS: &[&str] = &[
    "turn",
    "on",
    "off",
    "light",
    "lights",
    "screen",
    "dim",
    "set",
    "color",
    "brightness",
    "please",
    "the",
    "to",
    "green",
    "left",
    "front",
    "number",
    "1",
    "2",
    "7",
    "and",
    "monitor",
    "say",
    "all",
];

fn registry() -> Registry {
    build_demo_registry(&Home::new())
}

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 0..7).prop_map(|w| w.join(" "))
}

proptest! {
    /// A similarity resolution is reproduced by matching and scoring the
    /// chosen command on its own.
    #[test]
    fn resolved_calls_are_internally_consistent(s in sentence()) {
        let registry = registry();
        if let ResolutionResult::Resolved(call) = resolve(&registry, &s).result {
            prop_assume!(call.via == Via::Similarity);
            let spec = registry.get(&call.command_id).unwrap();
            let tokens = tokenize(&s);
            let bindings = match_parameters(spec, &tokens, &mut ValueCache::new()).unwrap();
            let mut arguments = vec![speakable::ArgValue::Absent; spec.parameters.len()];
            for b in &bindings {
                arguments[b.parameter] = b.value.clone();
            }
            prop_assert_eq!(&arguments, &call.arguments);

            let rules = registry.applicable_synonyms(spec, bindings.iter().map(|b| b.parameter));
            let scored = score_command(spec, &tokens, &bindings, &rules);
            prop_assert!(
                call.score == scored.score || call.score == adjusted_score(spec, &scored),
                "{} reported {:?}, scored {:?}", s, call.score, scored.score
            );
            prop_assert!(call.score.reaches(registry.threshold()));
        }
    }

    /// The winner may still change: a higher threshold can trigger the
    /// extra/optional word adjustment, which re-ranks candidates.
    #[test]
    fn raising_the_threshold_never_creates_a_match(s in sentence(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let registry = registry();
        let (low, high) = if a <= b { (a, b) } else { (b, a) };
        let at_low = resolve(&registry.with_threshold(low).unwrap(), &s).result;
        let at_high = resolve(&registry.with_threshold(high).unwrap(), &s).result;
        if at_low.is_no_match() {
            prop_assert!(at_high.is_no_match(), "{s:?}: {at_low} at {low} but {at_high} at {high}");
        }
        if let Some(call) = at_high.resolved() {
            prop_assert!(call.score.reaches(high));
        }
    }

    /// Without argument tokens, only the set of words matters.
    #[test]
    fn word_order_does_not_matter_without_arguments(
        words in prop::sample::subsequence(
            &["turn", "on", "off", "light", "lights", "screen", "dim", "set", "please", "the", "brightness"][..],
            0..6,
        ).prop_shuffle(),
        seed in any::<u64>(),
    ) {
        let registry = registry();
        let mut shuffled = words.clone();
        let n = shuffled.len();
        if n > 1 {
            shuffled.rotate_left((seed % n as u64) as usize);
            shuffled.swap(0, n - 1);
        }
        let r1 = resolve(&registry, &words.join(" ")).result;
        let r2 = resolve(&registry, &shuffled.join(" ")).result;
        prop_assert_eq!(r1, r2);
    }
}

#[test]
fn order_variants_of_the_same_command() {
    let registry = registry();
    let a = resolve(&registry, "turn on light").result;
    let b = resolve(&registry, "light on turn").result;
    assert_eq!(a, b);
}
