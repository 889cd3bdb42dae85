#![allow(dead_code)]

pub mod oracle;
pub mod reference;
pub mod task_oracle;
