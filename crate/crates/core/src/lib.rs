pub mod tree;
pub mod transition;
pub mod oracle;
pub mod verify;
pub mod model;
pub mod eval;
