use super::atom::{AtomSet, Const, GroundAtom, ObjectClass};

/// Range of the `d_const/1` background facts.
pub const D_CONST_RANGE: std::ops::RangeInclusive<i64> = 0..=4;

/// Background knowledge: the `d_const` facts and the two bound rules
/// instantiated for every object class.
pub fn background_program() -> String {
    let mut out = format!(
        "d_const({}..{}).\n",
        D_CONST_RANGE.start(),
        D_CONST_RANGE.end()
    );
    for class in ObjectClass::ALL {
        let base = class.base();
        out.push_str(&format!(
            "{}(Dir,Dist,D) :- {base}(Dir,Dist), Dist >= D, d_const(D).\n",
            class.geq()
        ));
        out.push_str(&format!(
            "{}(Dir,Dist,D) :- {base}(Dir,Dist), Dist <= D, d_const(D).\n",
            class.leq()
        ));
    }
    out
}

/// Closes a context under the distance-bound rules: for every
/// `X(Dir,Dist)` with `X` in food/ghost/capsule and every `D` in the
/// `d_const` range, adds `X_dist_geq(Dir,Dist,D)` when `Dist >= D` and
/// `X_dist_leq(Dir,Dist,D)` when `Dist <= D`. The `d_const` facts themselves
/// stay in the background and are not returned.
pub fn derive_distance_atoms<'a>(ctx: impl IntoIterator<Item = &'a GroundAtom>) -> AtomSet {
    let mut out = AtomSet::new();
    for atom in ctx {
        out.insert(atom.clone());
        let Some(class) = ObjectClass::from_base(atom.predicate) else {
            continue;
        };
        let (dir, dist) = match (atom.args[0], atom.args[1]) {
            (d @ Const::Dir(_), Const::Int(n)) => (d, n),
            _ => continue,
        };
        for d in D_CONST_RANGE {
            if dist >= d {
                out.insert(GroundAtom::new(
                    class.geq(),
                    &[dir, Const::Int(dist), Const::Int(d)],
                ));
            }
            if dist <= d {
                out.insert(GroundAtom::new(
                    class.leq(),
                    &[dir, Const::Int(dist), Const::Int(d)],
                ));
            }
        }
    }
    out
}
