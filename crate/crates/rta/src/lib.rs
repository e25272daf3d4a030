pub mod scalar;
pub mod cartan;
pub mod linalg;
pub mod expr;
pub mod rewrite;
pub mod gwa;
pub mod cat_o;
pub mod rtm;
pub mod cli;
