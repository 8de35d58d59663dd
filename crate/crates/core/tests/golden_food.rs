//! Golden questions and answers for the food table.

mod common;

use common::{cases, norm};
use hctqa::domains::fixture;
use hctqa::nl::{question, ParsedTemplates};
use hctqa::query::{format_answer, ground_truth, render_sql};
use hctqa::{Fixed, Stream};
use rand::SeedableRng;

#[test]
fn questions_and_answers_match_the_worked_examples() {
    let d = fixture::food_domain();
    let parsed = ParsedTemplates::new(d.nl.clone(), &d.vocab).unwrap();
    let rel = fixture::food_rel();
    let mut rng = Stream::seed_from_u64(1);
    let cases = cases();
    assert_eq!(cases.len(), 15);
    for (q, text, answer) in cases {
        let got = question(&parsed, &q, &d.vocab, &mut rng).unwrap();
        assert_eq!(norm(&got), norm(text), "question {}", q.template_id);
        let a = ground_truth(&q, &rel).unwrap();
        assert_eq!(norm(&format_answer(&a)), norm(answer), "answer {}", q.template_id);
    }
}

#[test]
fn the_first_example_renders_the_documented_sql() {
    let (q, _, _) = cases().remove(0);
    assert_eq!(
        render_sql(&q),
        "SELECT Value FROM DBdata WHERE ((Import_Export = 'Export' AND Year = '2017')) AND ((Category = 'Dairy' AND Item = 'Milk'));"
    );
}

#[test]
fn the_threshold_of_the_example_is_the_mean_of_all_values() {
    assert_eq!(hctqa::query::threshold(&fixture::food_rel()), Fixed::new(5133, 1));
}
