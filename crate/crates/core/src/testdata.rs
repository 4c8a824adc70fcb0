//! Fixture loaders shared by unit tests.

use alloc::string::{String, ToString};
use alloc::vec;

use crate::localization::{LocalizationPackage, PackageFiles};
use crate::model::{Model, ModelSources};

pub const SPACE: &str = include_str!("../fixtures/fig-demo/space.ps");
pub const GRAPH: &str = include_str!("../fixtures/fig-demo/graph.dg");
pub const PLAN: &str = include_str!("../fixtures/fig-demo/plan.vi");

pub fn fig_demo_sources() -> ModelSources<'static> {
    ModelSources {
        id: "fig-demo",
        title: "Fair dismissal",
        version: "1.0",
        space: ("space.ps", SPACE),
        graphs: vec![("graph.dg", GRAPH)],
        inferencers: vec![("plan.vi", PLAN)],
    }
}

pub fn fig_demo() -> Model {
    Model::build(&fig_demo_sources()).expect("fixture builds")
}

fn pair(name: &str, text: &str) -> Option<(String, String)> {
    Some((name.to_string(), text.to_string()))
}

pub fn fig_demo_package_files() -> PackageFiles {
    let node = |id: &str, text: &str| (id.to_string(), alloc::format!("nodes/{id}.md"), text.to_string());
    PackageFiles {
        locale: "en".into(),
        model_md: pair("model.md", include_str!("../fixtures/fig-demo/languages/en/model.md")),
        nodes: vec![
            node("gp-hearing", include_str!("../fixtures/fig-demo/languages/en/nodes/gp-hearing.md")),
            node(
                "gp-hearing-details",
                include_str!("../fixtures/fig-demo/languages/en/nodes/gp-hearing-details.md"),
            ),
            node("gp-complaint", include_str!("../fixtures/fig-demo/languages/en/nodes/gp-complaint.md")),
        ],
        answers: pair("answers.txt", include_str!("../fixtures/fig-demo/languages/en/answers.txt")),
        space_md: pair("space.md", include_str!("../fixtures/fig-demo/languages/en/space.md")),
    }
}

pub fn fig_demo_package() -> LocalizationPackage {
    LocalizationPackage::build(&fig_demo(), &fig_demo_package_files()).expect("fixture package builds")
}
