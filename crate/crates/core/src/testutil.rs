//! Random instances over the built-in domains for unit tests.

use rand::SeedableRng;

use crate::domains::{builtin, Domain};
use crate::pivot::{pivot, HctTable};
use crate::tablegen::{expand_generic, generate_relational, IndividualTableTemplate, RelationalTable};
use crate::Stream;

pub struct Instance {
    pub domain: Domain,
    pub tpl: IndividualTableTemplate,
    pub rel: RelationalTable,
    pub hct: HctTable,
}

pub fn instance(seed: u64) -> Instance {
    let mut domains = builtin().unwrap();
    let domain = domains.remove(seed as usize % domains.len());
    let tpls = expand_generic(&domain.table_template, &domain.vocab).unwrap();
    let tpl = tpls[(seed / 7) as usize % tpls.len()].clone();
    let mut rng = Stream::seed_from_u64(seed);
    let rel = generate_relational(&tpl, &domain.vocab, 2, &mut rng).unwrap();
    let hct = pivot(&rel, &tpl, 2, &mut rng).unwrap();
    Instance { domain, tpl, rel, hct }
}
