//! Small example families used throughout the test suites.

use crate::arrangement::{load_family, ArrangementFamily, FiberPoint, WeightVector};

/// Two points on a line: k=1, n=2, g = (t, t), x = (0, -1).
pub fn fix1() -> (ArrangementFamily, WeightVector, FiberPoint) {
    load_family(r#"{"k":1,"n":2,"B":[[1,1]],"weights":[1,1],"x":[0,-1]}"#).unwrap()
}

/// Three points on a line: k=1, n=3, x = (0, -1, -2).
pub fn fix2() -> (ArrangementFamily, WeightVector, FiberPoint) {
    load_family(r#"{"k":1,"n":3,"B":[[1,1,1]],"weights":[1,1,1],"x":[0,-1,-2]}"#).unwrap()
}

/// A triangle in the plane: k=2, n=3, g = (t1, t2, t1+t2), x = (0, 0, -1).
pub fn fix3() -> (ArrangementFamily, WeightVector, FiberPoint) {
    load_family(r#"{"k":2,"n":3,"B":[[1,0,1],[0,1,1]],"weights":[1,1,1],"x":[0,0,-1]}"#).unwrap()
}
