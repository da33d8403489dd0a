//! Small handcrafted tasks used by tests, benchmarks and the CLI.
//!
//! Together they cover regular, prevailing and mechanical transitions,
//! unary transitions and unary difference sets, parallel steps, goals that
//! already hold, and unsolvable goals.

use crate::sas::{toy_fixture, Effect, Operator, SasTask, StateVariable};

pub struct Fixture {
    pub name: &'static str,
    pub task: SasTask,
}

type Pair<'a> = (&'a str, &'a str);

/// `(variable, Some(pre) | None, post)`.
type Eff<'a> = (&'a str, Option<&'a str>, &'a str);

struct OpSpec<'a> {
    name: &'a str,
    prevail: &'a [Pair<'a>],
    effects: &'a [Eff<'a>],
}

fn op<'a>(name: &'a str, prevail: &'a [Pair<'a>], effects: &'a [Eff<'a>]) -> OpSpec<'a> {
    OpSpec { name, prevail, effects }
}

fn build(vars: &[(&str, &[&str])], ops: &[OpSpec], init: &[Pair], goal: &[Pair]) -> SasTask {
    let var = |name: &str| vars.iter().position(|(n, _)| *n == name).expect("declared variable");
    let val = |v: usize, value: &str| vars[v].1.iter().position(|d| *d == value).expect("declared value");
    let pair = |(n, value): &Pair| {
        let v = var(n);
        (v, val(v, value))
    };
    let variables = vars.iter().map(|(n, d)| StateVariable::new(*n, d)).collect();
    let operators = ops
        .iter()
        .map(|o| {
            let effects = o
                .effects
                .iter()
                .map(|(n, pre, post)| {
                    let v = var(n);
                    Effect {
                        var: v,
                        pre: pre.map(|p| val(v, p)),
                        post: val(v, post),
                    }
                })
                .collect();
            Operator::new(o.name, o.prevail.iter().map(pair).collect(), effects)
        })
        .collect();
    let mut initial = vec![usize::MAX; vars.len()];
    for p in init {
        let (v, x) = pair(p);
        initial[v] = x;
    }
    SasTask::new(variables, operators, initial, goal.iter().map(pair).collect()).expect("fixture is well formed")
}

fn toy_with_goal(goal: &[Pair]) -> SasTask {
    let mut task = toy_fixture();
    task.goal = crate::sas::named_assignment(&task, goal).expect("toy names");
    task.goal.sort_unstable();
    task
}

/// The toy task with a fresh value `z` of `x` as goal; nothing reaches it.
pub fn toy_unreachable() -> SasTask {
    let mut task = toy_fixture();
    task.variables[0].domain.push("z".into());
    task.goal = vec![(0, 3)];
    task.validate().expect("fresh value is in range");
    task
}

/// Breaking a vase and painting a wall: `*->shards` and `*->red` are
/// mechanical transitions.
pub fn workshop() -> SasTask {
    build(
        &[
            ("vase", &["intact", "cracked", "shards"]),
            ("hammer", &["rack", "hand"]),
            ("wall", &["white", "blue", "red"]),
        ],
        &[
            op("grab", &[], &[("hammer", Some("rack"), "hand")]),
            op("tap", &[("hammer", "hand")], &[("vase", Some("intact"), "cracked")]),
            op("smash", &[("hammer", "hand")], &[("vase", None, "shards")]),
            op("glue", &[], &[("vase", Some("cracked"), "intact")]),
            op("paint_blue", &[], &[("wall", Some("white"), "blue")]),
            op("paint_red", &[], &[("wall", None, "red")]),
        ],
        &[("vase", "intact"), ("hammer", "rack"), ("wall", "white")],
        &[("vase", "shards"), ("wall", "red"), ("hammer", "hand")],
    )
}

/// A truck that burns its fuel on every drive. Each drive action differs
/// from the shared `fuel:full->empty` only in the location change.
pub fn fuel_truck() -> SasTask {
    let full_empty = ("fuel", Some("full"), "empty");
    build(
        &[
            ("loc", &["a", "b", "c"]),
            ("fuel", &["full", "empty"]),
            ("cargo", &["at_c", "truck", "at_b"]),
        ],
        &[
            op("drive_a_b", &[], &[("loc", Some("a"), "b"), full_empty]),
            op("drive_a_c", &[], &[("loc", Some("a"), "c"), full_empty]),
            op("drive_c_b", &[], &[("loc", Some("c"), "b"), full_empty]),
            op("drive_c_a", &[], &[("loc", Some("c"), "a"), full_empty]),
            op("refuel", &[("loc", "c")], &[("fuel", Some("empty"), "full")]),
            op("load", &[("loc", "c")], &[("cargo", Some("at_c"), "truck")]),
            op("unload", &[("loc", "b")], &[("cargo", Some("truck"), "at_b")]),
        ],
        &[("loc", "a"), ("fuel", "full"), ("cargo", "at_c")],
        &[("cargo", "at_b")],
    )
}

/// Two independent robots on a three-cell line; both moves fit in one step.
pub fn two_robots() -> SasTask {
    build(
        &[("r1", &["p0", "p1", "p2"]), ("r2", &["p0", "p1", "p2"])],
        &[
            op("r1_fwd_0", &[], &[("r1", Some("p0"), "p1")]),
            op("r1_fwd_1", &[], &[("r1", Some("p1"), "p2")]),
            op("r1_back_1", &[], &[("r1", Some("p1"), "p0")]),
            op("r2_fwd_0", &[], &[("r2", Some("p0"), "p1")]),
            op("r2_fwd_1", &[], &[("r2", Some("p1"), "p2")]),
            op("r2_back_2", &[], &[("r2", Some("p2"), "p1")]),
        ],
        &[("r1", "p0"), ("r2", "p0")],
        &[("r1", "p2"), ("r2", "p2")],
    )
}

/// A chain of prevail conditions: key, then door, then entering.
pub fn door_key() -> SasTask {
    build(
        &[
            ("key", &["floor", "held"]),
            ("door", &["locked", "open"]),
            ("agent", &["out", "in"]),
        ],
        &[
            op("pick_key", &[("agent", "out")], &[("key", Some("floor"), "held")]),
            op("unlock", &[("key", "held")], &[("door", Some("locked"), "open")]),
            op("knock", &[("door", "locked"), ("agent", "out")], &[]),
            op("enter", &[("door", "open")], &[("agent", Some("out"), "in")]),
            op("leave", &[("door", "open")], &[("agent", Some("in"), "out")]),
        ],
        &[("key", "floor"), ("door", "locked"), ("agent", "out")],
        &[("agent", "in"), ("key", "held")],
    )
}

/// Each switch needs the other one already on: unsolvable.
pub fn deadlock() -> SasTask {
    build(
        &[("p", &["off", "on"]), ("q", &["off", "on"])],
        &[
            op("set_p", &[("q", "on")], &[("p", Some("off"), "on")]),
            op("set_q", &[("p", "on")], &[("q", Some("off"), "on")]),
        ],
        &[("p", "off"), ("q", "off")],
        &[("p", "on")],
    )
}

/// Supporters of `x:f->g` differ by transitions on different variables, so
/// they do not form a reducible unary difference set.
pub fn split_difference() -> SasTask {
    build(
        &[("x", &["f", "g"]), ("y", &["d", "e"]), ("z", &["p", "q"])],
        &[
            op("a1", &[], &[("x", Some("f"), "g"), ("y", Some("d"), "e")]),
            op("a2", &[], &[("x", Some("f"), "g"), ("z", Some("p"), "q")]),
            op("b", &[], &[("y", Some("d"), "e")]),
        ],
        &[("x", "f"), ("y", "d"), ("z", "p")],
        &[("x", "g"), ("y", "e"), ("z", "q")],
    )
}

/// Two operators with identical effects.
pub fn twin_operators() -> SasTask {
    build(
        &[("lamp", &["off", "on"]), ("fan", &["off", "on"])],
        &[
            op("switch_a", &[], &[("lamp", Some("off"), "on")]),
            op("switch_b", &[], &[("lamp", Some("off"), "on")]),
            op("fan_on", &[("lamp", "on")], &[("fan", Some("off"), "on")]),
        ],
        &[("lamp", "off"), ("fan", "off")],
        &[("fan", "on")],
    )
}

/// Every fixture, toy first.
pub fn all() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "toy",
            task: toy_fixture(),
        },
        Fixture {
            name: "toy_goal_ye",
            task: toy_with_goal(&[("x", "h"), ("y", "e")]),
        },
        Fixture {
            name: "toy_unreachable",
            task: toy_unreachable(),
        },
        Fixture {
            name: "toy_goal_initial",
            task: toy_with_goal(&[("x", "f")]),
        },
        Fixture {
            name: "workshop",
            task: workshop(),
        },
        Fixture {
            name: "fuel_truck",
            task: fuel_truck(),
        },
        Fixture {
            name: "two_robots",
            task: two_robots(),
        },
        Fixture {
            name: "door_key",
            task: door_key(),
        },
        Fixture {
            name: "deadlock",
            task: deadlock(),
        },
        Fixture {
            name: "split_difference",
            task: split_difference(),
        },
        Fixture {
            name: "twin_operators",
            task: twin_operators(),
        },
    ]
}

pub fn by_name(name: &str) -> Option<SasTask> {
    all().into_iter().find(|f| f.name == name).map(|f| f.task)
}
