//! Encode entity memberships as bitsets and enumerate level-k subgroups.
use emaudit::groups::{
    encode_groups, enumerate_level_k_subgroups, subgroup_contains, AttributeKind, GroupUniverse, SensitiveAttribute,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let u = GroupUniverse::new(vec![
        SensitiveAttribute::new("gender", AttributeKind::Binary, &["Female", "Male"]),
        SensitiveAttribute::new("genre", AttributeKind::Setwise, &["Jazz", "Pop", "Rock"]),
    ])?;
    let entity = encode_groups(&u, ["Female", "Pop", "Rock"])?;
    println!("entity {entity} = {}", u.label(&entity));
    for k in 1..=2 {
        for s in enumerate_level_k_subgroups(&u, k, false) {
            println!("level {k} {s} {:<12} contained: {}", u.label(&s), subgroup_contains(&s, &entity)?);
        }
    }
    Ok(())
}
