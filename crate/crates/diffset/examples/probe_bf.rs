use diffset::constructions::brute_force_search;
use std::time::Instant;
fn main() {
    for (v, k, l) in [(22u64,7u64,2u64),(29,8,2),(25,9,3),(34,12,4),(45,12,3),(27,13,6)] {
        let t = Instant::now();
        let found = brute_force_search(v, k, l, 1);
        println!("({v},{k},{l}): {} found in {:.2?}", found.len(), t.elapsed());
    }
}
