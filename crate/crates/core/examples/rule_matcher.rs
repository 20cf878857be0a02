//! A DNF rule matcher and a weighted similarity scorer over two small tables.
use emaudit::dataset::EntityTable;
use emaudit::matchers::similarity::{similarity, Feature};
use emaudit::matchers::{rule_match, score_match, Comparator, RuleSet, Scorer, SimilarityPredicate, WeightedFeature};

const LEFT: &str = "id,firstName,lastName\nl1,Jonathan,Smith\nl2,Maria,Garcia\n";
const RIGHT: &str = "id,firstName,lastName\nr1,Jonathon,Smyth\nr2,Mario,Gracia\nr3,Wei,Zhang\n";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let left = EntityTable::read(LEFT.as_bytes())?;
    let right = EntityTable::read(RIGHT.as_bytes())?;
    let rules = RuleSet::new(vec![vec![
        SimilarityPredicate::new("firstName", Feature::Levenshtein, Comparator::Gt, 0.6),
        SimilarityPredicate::new("lastName", Feature::Levenshtein, Comparator::Gt, 0.6),
    ]])?;
    let scorer = Scorer::new(vec![
        WeightedFeature { attribute: "firstName".into(), feature: Feature::Levenshtein, weight: 1.0 },
        WeightedFeature { attribute: "lastName".into(), feature: Feature::Levenshtein, weight: 1.0 },
    ])?;
    for l in left.records() {
        for r in right.records() {
            let s = scorer.score(&l, &r)?;
            println!(
                "{} {} lev(last)={:.2} score={s:.2} rule={} threshold(0.5)={}",
                l.id(),
                r.id(),
                similarity(Feature::Levenshtein, l.get("lastName").unwrap(), r.get("lastName").unwrap()),
                rule_match(&rules, &l, &r)?.as_str(),
                score_match(s, 0.5).as_str(),
            );
        }
    }
    Ok(())
}
