//! Runs the guide's snippets as doctests. Each chapter is its own module so
//! a failure names the chapter it came from.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}

#[doc = include_str!("../../../book/src/groups.md")]
pub mod groups {}

#[doc = include_str!("../../../book/src/objectives.md")]
pub mod objectives {}

#[doc = include_str!("../../../book/src/ekeland.md")]
pub mod ekeland {}

#[doc = include_str!("../../../book/src/separation.md")]
pub mod separation {}

#[doc = include_str!("../../../book/src/consequences.md")]
pub mod consequences {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
