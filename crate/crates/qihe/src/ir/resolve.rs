//! Hierarchical name resolution: instance segments, then a declared leaf.

use super::types::*;

/// A declaration reached by [`resolve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Entity<'a> {
    Net(&'a NetDecl),
    Var(&'a VarDecl),
    Const(&'a ConstDecl),
    Inst(&'a Inst),
    Func(&'a Func),
}

impl<'a> Entity<'a> {
    pub fn id(&self) -> &'a str {
        match self {
            Entity::Net(n) => &n.id,
            Entity::Var(v) => &v.id,
            Entity::Const(c) => &c.id,
            Entity::Inst(i) => &i.id,
            Entity::Func(f) => &f.id,
        }
    }
}

/// The result of resolving a hierarchical path: the defining module, the
/// declaration, and the instance segments walked to reach it.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved<'a> {
    pub module: &'a Module,
    pub entity: Entity<'a>,
    pub instances: Vec<String>,
}

/// Resolves a dotted path starting inside `module`. Every segment but the
/// last must name an instance; the last names a declaration in the module
/// reached.
pub fn resolve<'a>(d: &'a Design, module: &str, path: &str) -> Result<Resolved<'a>, IrError> {
    let mut m = d
        .module(module)
        .ok_or_else(|| IrError::UnknownModule(module.to_string()))?;
    let segments: Vec<&str> = path.split('.').collect();
    let mut instances = Vec::new();
    for seg in &segments[..segments.len() - 1] {
        let inst = m.inst(seg).ok_or_else(|| IrError::UnknownInstance {
            module: m.name.clone(),
            inst: seg.to_string(),
        })?;
        m = d
            .module(&inst.module)
            .ok_or_else(|| IrError::UnknownModule(inst.module.clone()))?;
        instances.push(seg.to_string());
    }
    let leaf = segments[segments.len() - 1];
    let entity = if let Some(n) = m.net(leaf) {
        Entity::Net(n)
    } else if let Some(v) = m.var(leaf) {
        Entity::Var(v)
    } else if let Some(c) = m.konst(leaf) {
        Entity::Const(c)
    } else if let Some(i) = m.inst(leaf) {
        Entity::Inst(i)
    } else if let Some(f) = m.funcs.iter().find(|f| f.id == leaf) {
        Entity::Func(f)
    } else {
        return Err(IrError::UnknownName { module: m.name.clone(), name: leaf.to_string() });
    };
    Ok(Resolved { module: m, entity, instances })
}

#[cfg(test)]
mod tests {
    use super::super::emit::tests::sample_design;
    use super::*;

    #[test]
    fn resolves_through_instance() {
        let d = sample_design();
        let r = resolve(&d, "accSqrDouble", "i.$t1").unwrap();
        assert_eq!(r.module.name, "doubler");
        assert_eq!(r.entity.id(), "$t1");
        assert!(matches!(r.entity, Entity::Net(n) if n.dir == Some(Dir::Input)));
        assert_eq!(r.instances, ["i"]);
    }

    #[test]
    fn resolves_local_names() {
        let d = sample_design();
        let r = resolve(&d, "accSqrDouble", "acc").unwrap();
        assert!(matches!(r.entity, Entity::Var(_)));
        assert!(r.instances.is_empty());

        let r = resolve(&d, "accSqrDouble", "i").unwrap();
        assert!(matches!(r.entity, Entity::Inst(_)));
    }

    #[test]
    fn unknown_leaf_and_instance() {
        let d = sample_design();
        assert!(matches!(
            resolve(&d, "accSqrDouble", "i.nope"),
            Err(IrError::UnknownName { .. })
        ));
        assert!(matches!(
            resolve(&d, "accSqrDouble", "zz.x"),
            Err(IrError::UnknownInstance { .. })
        ));
        assert!(matches!(resolve(&d, "missing", "x"), Err(IrError::UnknownModule(_))));
    }
}
