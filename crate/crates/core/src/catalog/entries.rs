use super::{CatalogEntry, DeltaRule, EntryKind, FunctionInfo, ParamInfo, SystemForm};
use crate::frames::Delta;

const fn param(name: &'static str, default: f64) -> ParamInfo {
    ParamInfo { name, default, nonzero: false, allowed: &[] }
}

const fn nonzero(name: &'static str, default: f64) -> ParamInfo {
    ParamInfo { name, default, nonzero: true, allowed: &[] }
}

const fn helper(name: &'static str, args: &'static [&'static str], body: &'static str) -> FunctionInfo {
    FunctionInfo { name, args, body, user: false }
}

const fn user(name: &'static str, args: &'static [&'static str], body: &'static str) -> FunctionInfo {
    FunctionInfo { name, args, body, user: true }
}

const PSI_TRIG: &str = "k0*(cos(theta)/(2*a*b)*(a^2*u^2 - b^2*v^2) + u*v*sin(theta)) - a*b*(k1*u + k2*v + k3)";
const PSI_HYP: &str = "k0*(cosh(theta)/(2*a*b)*(a^2*u^2 - b^2*v^2) + sinh(theta)*u*v) - a*b*(k1*u + k2*v + k3)";
const SEVEN_PARAMS: &[ParamInfo] = &[
    nonzero("eta", 1.0),
    nonzero("a", 1.0),
    nonzero("b", 1.0),
    param("theta", 0.7),
    nonzero("k0", 1.0),
    param("k1", 0.3),
    param("k2", -0.2),
    param("k3", 0.1),
];
const Q_DEFAULT: &str = "z*y + sin(y)";
const Q_DENOMINATOR: &str = "k2*q[0,1](ux,vx) - k1*q[1,0](ux,vx)";

pub(super) static ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        key: "plr",
        name: "Pohlmeyer-Lund-Regge type system",
        kind: EntryKind::Example,
        delta: DeltaRule::Fixed(Delta::Pss),
        params: &[nonzero("eta", 1.0)],
        functions: &[],
        system: SystemForm::Given { f: "2*u*v*ux - u", g: "-2*u*v*vx - v" },
        frame: [["eta*(ux + vx)", "(v - u)/eta"], ["eta^2", "-1/eta^2 - 2*u*v"], ["eta*(ux - vx)", "-(u + v)/eta"]],
        conditions: &[],
        data: ["0.5 + 0.2*x + 0.1*sin(2*x)", "-0.5 - 0.1*x", "0.5 - 0.2*t", "-0.5 + 0.1*t + 0.1*sin(2*t)"],
    },
    CatalogEntry {
        key: "konno-oono",
        name: "Konno-Oono coupled dispersionless system",
        kind: EntryKind::Example,
        delta: DeltaRule::Fixed(Delta::Pss),
        params: &[nonzero("nu", 1.0)],
        functions: &[],
        system: SystemForm::Given { f: "-2*v*vx", g: "2*v*ux" },
        frame: [["2*vx/nu", "0"], ["2*ux/nu", "nu"], ["0", "2*v"]],
        conditions: &[],
        data: ["0.1*sin(2*x)", "-0.4 + 0.8*x + 0.1*sin(x)", "0.1*t", "-0.4 + 0.3*t"],
    },
    CatalogEntry {
        key: "ex3.3",
        name: "cubic system with constant c, pseudospherical",
        kind: EntryKind::Example,
        delta: DeltaRule::Fixed(Delta::Pss),
        params: &[nonzero("eta", 1.0), param("c", 0.5)],
        functions: &[],
        system: SystemForm::Given { f: "(u^2 - v^2 + c)*vx + u", g: "(u^2 - v^2 + c)*ux + v" },
        frame: [
            ["-sqrt(2)*eta*ux", "sqrt(2)*v/eta"],
            ["eta^2", "1/eta^2 + u^2 - v^2 + c"],
            ["sqrt(2)*eta*vx", "-sqrt(2)*u/eta"],
        ],
        conditions: &[],
        data: ["0.1 + 0.3*x + 0.1*sin(2*x)", "0.2 - 0.3*x", "0.1 + 0.2*t", "0.2 + 0.3*t + 0.1*sin(t)"],
    },
    CatalogEntry {
        key: "ex3.4",
        name: "cubic system with constant c, spherical",
        kind: EntryKind::Example,
        delta: DeltaRule::Fixed(Delta::Ss),
        params: &[nonzero("eta", 1.0), param("c", 0.5)],
        functions: &[],
        system: SystemForm::Given { f: "(u^2 + v^2 + c)*vx + u", g: "-(u^2 + v^2 + c)*ux + v" },
        frame: [
            ["-sqrt(2)*eta*vx", "sqrt(2)*u/eta"],
            ["eta^2", "-1/eta^2 + u^2 + v^2 + c"],
            ["-sqrt(2)*eta*ux", "-sqrt(2)*v/eta"],
        ],
        conditions: &[],
        data: ["0.1 + 0.3*x + 0.1*sin(2*x)", "0.2 - 0.3*x", "0.1 + 0.2*t", "0.2 + 0.3*t + 0.1*sin(t)"],
    },
    CatalogEntry {
        key: "ex3.5",
        name: "exponential system linear in vx",
        kind: EntryKind::Example,
        delta: DeltaRule::Fixed(Delta::Ss),
        params: &[param("eta", 1.0), nonzero("a", 1.0), param("b", 0.5)],
        functions: &[],
        system: SystemForm::Given { f: "(a*vx + b)*exp(u)", g: "-2/a*exp(u)*ux" },
        frame: [["ux", "0"], ["eta", "-exp(u)"], ["eta + a*vx + b", "-exp(u)"]],
        conditions: &[],
        data: ["-1 + 0.5*x", "0.3*x + 0.1*sin(2*x)", "-1 + 0.2*t", "0.3*t"],
    },
    CatalogEntry {
        key: "ex3.6",
        name: "exponential system in u - vx and u + vx",
        kind: EntryKind::Example,
        delta: DeltaRule::Fixed(Delta::Pss),
        params: &[param("eta", 1.0)],
        functions: &[],
        system: SystemForm::Given { f: "2*exp(u - vx)", g: "ux*exp(u + vx)" },
        frame: [["-sqrt(2)/2*ux", "0"], ["eta", "sqrt(2)*exp(u)"], ["-sqrt(2)*eta + exp(-vx)", "-2*exp(u)"]],
        conditions: &[],
        data: ["-2 + 0.3*x", "0.1*sin(2*x)", "-2 + 0.2*t", "0.1*t"],
    },
    CatalogEntry {
        key: "ex3.7",
        name: "exponential system bilinear in (ux, vx) and exp(u)",
        kind: EntryKind::Example,
        delta: DeltaRule::Fixed(Delta::Pss),
        params: &[param("eta", 1.0)],
        functions: &[],
        system: SystemForm::Given { f: "-2*vx*exp(u)", g: "ux*exp(u)" },
        frame: [["-sqrt(2)/2*ux", "0"], ["eta", "-sqrt(2)*exp(u)"], ["-sqrt(2)*eta + vx", "2*exp(u)"]],
        conditions: &[],
        data: ["-1 + 0.5*x", "0.1*sin(2*x)", "-1 + 0.1*t", "0.2*t"],
    },
    CatalogEntry {
        key: "ex3.8",
        name: "system with a strictly monotone function phi(vx)",
        kind: EntryKind::Example,
        delta: DeltaRule::Either(Delta::Pss),
        params: &[nonzero("a", 1.0), param("b", 0.5), nonzero("eta", 1.0)],
        functions: &[user("phi", &["s"], "exp(s)")],
        system: SystemForm::Given { f: "(a*u + b)*phi(vx) + 1", g: "delta*a^2/phi'(vx)*ux*(a*u + b)" },
        frame: [["eta*a*ux", "0"], ["eta^2", "a^2*u + a*b"], ["-eta*phi(vx)", "a/eta"]],
        conditions: &[("phi'(vx)", "phi must be strictly monotone")],
        data: ["-1.5 + 0.3*x + 0.05*sin(2*x)", "0.1*x", "-1.5 + 0.1*sin(t)", "0.1*sin(t)"],
    },
    CatalogEntry {
        key: "ex3.9",
        name: "cubic system u ux vx",
        kind: EntryKind::Example,
        delta: DeltaRule::Fixed(Delta::Pss),
        params: &[nonzero("nu", 1.0), ParamInfo { name: "sigma", default: 1.0, nonzero: true, allowed: &[1.0, -1.0] }],
        functions: &[],
        system: SystemForm::Given { f: "u*ux*vx", g: "-u*(vx^2 + 1)" },
        frame: [["sigma*ux/nu", "0"], ["ux*vx/nu", "nu"], ["0", "sigma*u"]],
        conditions: &[],
        data: ["0.5 + 0.3*x", "0.2*x + 0.1*sin(2*x)", "0.5 + 0.1*t", "0.4*t"],
    },
    CatalogEntry {
        key: "cor5.1",
        name: "seven-parameter family, trigonometric, pseudospherical",
        kind: EntryKind::Corollary,
        delta: DeltaRule::Fixed(Delta::Pss),
        params: SEVEN_PARAMS,
        functions: &[helper("psi", &["u", "v"], PSI_TRIG)],
        system: SystemForm::Given {
            f: "a*b*sin(theta)*(ux*psi(u,v) - k2) - b^2*cos(theta)*(vx*psi(u,v) + k1) + k0*u",
            g: "-a^2*cos(theta)*(ux*psi(u,v) - k2) - a*b*sin(theta)*(vx*psi(u,v) + k1) + k0*v",
        },
        frame: [
            [
                "eta*(a*sin(theta/2)*ux - b*cos(theta/2)*vx)",
                "(b*cos(theta/2)*psi[1,0](u,v) + a*sin(theta/2)*psi[0,1](u,v))/eta",
            ],
            ["eta^2", "k0/eta^2 - a*b*psi(u,v)"],
            [
                "eta*(a*cos(theta/2)*ux + b*sin(theta/2)*vx)",
                "(-b*sin(theta/2)*psi[1,0](u,v) + a*cos(theta/2)*psi[0,1](u,v))/eta",
            ],
        ],
        conditions: &[],
        data: ["0.5*x + 0.05*sin(2*x)", "-0.5*x", "0.1*sin(t)", "0.2*t"],
    },
    CatalogEntry {
        key: "cor5.2",
        name: "seven-parameter family, hyperbolic, spherical",
        kind: EntryKind::Corollary,
        delta: DeltaRule::Fixed(Delta::Ss),
        params: SEVEN_PARAMS,
        functions: &[helper("psi", &["u", "v"], PSI_HYP)],
        system: SystemForm::Derived {
            printed_f: "a*b*sinh(theta)*(ux*psi(u,v) - k2) - b^2*cosh(theta)*(vx*psi(u,v) + k1) + k0*u",
            printed_g: "-a^2*cosh(theta)*(ux*psi(u,v) - k2) - a*b*sinh(theta)*(vx*psi(u,v) + k1) + k0*v",
        },
        frame: [
            [
                "eta*(a*sinh(theta/2)*ux - b*cosh(theta/2)*vx)",
                "(b*cosh(theta/2)*psi[1,0](u,v) + a*sinh(theta/2)*psi[0,1](u,v))/eta",
            ],
            ["eta^2", "k0/eta^2 - a*b*psi(u,v)"],
            [
                "eta*(a*cosh(theta/2)*ux - b*sinh(theta/2)*vx)",
                "(b*sinh(theta/2)*psi[1,0](u,v) + a*cosh(theta/2)*psi[0,1](u,v))/eta",
            ],
        ],
        conditions: &[],
        data: ["0.5*x + 0.05*sin(2*x)", "-0.5*x", "0.1*sin(t)", "0.2*t"],
    },
    CatalogEntry {
        key: "cor5.3",
        name: "family with exp(k0 u) and a strictly monotone psi(vx)",
        kind: EntryKind::Corollary,
        delta: DeltaRule::Either(Delta::Pss),
        params: &[param("eta", 1.0), nonzero("k0", 1.0), nonzero("k1", 1.0), nonzero("k2", 1.0)],
        functions: &[user("psi", &["s"], "s^3/3 + s")],
        system: SystemForm::Given {
            f: "k1*exp(k0*u)*psi(vx)",
            g: "k1*(delta/k2^2 - k0^2)*exp(k0*u)*ux/psi'(vx)",
        },
        frame: [["ux/k2", "0"], ["eta", "-(k1/k2)*exp(k0*u)"], ["eta*k0*k2 + psi(vx)", "-k0*k1*exp(k0*u)"]],
        conditions: &[("psi'(vx)", "psi must be strictly monotone")],
        data: ["-1.5 + 0.5*x", "0.3*x + 0.05*sin(2*x)", "-1.5 + 0.1*t", "0.1*t"],
    },
    CatalogEntry {
        key: "cor5.4",
        name: "family linear in (u, v) with a function q(ux, vx), constant f21",
        kind: EntryKind::Corollary,
        delta: DeltaRule::Either(Delta::Pss),
        params: &[nonzero("eta", 1.0), nonzero("k0", 1.0), param("k1", 0.5), param("k2", 1.0), param("k3", 0.0)],
        functions: &[user("q", &["z", "y"], Q_DEFAULT)],
        system: SystemForm::Given {
            f: "k0/(k2*q[0,1](ux,vx) - k1*q[1,0](ux,vx))*(q[0,1](ux,vx) + (k1*v + k2*u + k3)*(delta*k1*(k1*vx + k2*ux) - q(ux,vx)*q[0,1](ux,vx)))",
            g: "-k0/(k2*q[0,1](ux,vx) - k1*q[1,0](ux,vx))*(q[1,0](ux,vx) + (k1*v + k2*u + k3)*(delta*k2*(k1*vx + k2*ux) - q(ux,vx)*q[1,0](ux,vx)))",
        },
        frame: [["eta*(k1*vx + k2*ux)", "0"], ["eta^2", "k0*(k1*v + k2*u) + k0*k3"], ["eta*q(ux,vx)", "k0/eta"]],
        conditions: &[(Q_DENOMINATOR, "k2*q_vx - k1*q_ux must not vanish identically")],
        data: ["0.1 + 0.3*x", "0.2*x + 0.1*sin(2*x)", "0.1 + 0.2*t", "0.3*t"],
    },
    CatalogEntry {
        key: "cor5.5",
        name: "family linear in (u, v) with a function q(ux, vx), constant f31",
        kind: EntryKind::Corollary,
        delta: DeltaRule::Either(Delta::Pss),
        params: &[nonzero("nu", 1.0), nonzero("k0", 1.0), param("k1", 0.5), param("k2", 1.0), param("k3", 0.0)],
        functions: &[user("q", &["z", "y"], Q_DEFAULT)],
        system: SystemForm::Given {
            f: "delta*(q(ux,vx)*q[0,1](ux,vx) + k0^2*k1*(k1*vx + k2*ux))/(k2*q[0,1](ux,vx) - k1*q[1,0](ux,vx))*(k1*v + k2*u + k3)",
            g: "-delta*(q(ux,vx)*q[1,0](ux,vx) + k0^2*k2*(k1*vx + k2*ux))/(k2*q[0,1](ux,vx) - k1*q[1,0](ux,vx))*(k1*v + k2*u + k3)",
        },
        frame: [["delta*k0*(k1*vx + k2*ux)/nu", "0"], ["q(ux,vx)/nu", "nu"], ["0", "k0*(k1*v + k2*u + k3)"]],
        conditions: &[(Q_DENOMINATOR, "k2*q_vx - k1*q_ux must not vanish identically")],
        data: ["-0.1 + 0.3*x", "0.2*x + 0.1*sin(2*x)", "-0.1 + 0.1*t", "0.1*t"],
    },
    CatalogEntry {
        key: "nls-minus",
        name: "nonlinear Schrodinger system, pseudospherical",
        kind: EntryKind::EvolutionReference,
        delta: DeltaRule::Fixed(Delta::Pss),
        params: &[param("eta", 1.0)],
        functions: &[],
        system: SystemForm::Evolution { u_t: "-vxx + 2*(u^2 + v^2)*v", v_t: "uxx - 2*(u^2 + v^2)*u" },
        frame: [["2*u", "-4*eta*u - 2*vx"], ["-2*v", "4*eta*v - 2*ux"], ["2*eta", "-4*eta^2 - 2*(u^2 + v^2)"]],
        conditions: &[],
        data: ["0", "0", "0", "0"],
    },
    CatalogEntry {
        key: "nls-plus",
        name: "nonlinear Schrodinger system, spherical",
        kind: EntryKind::EvolutionReference,
        delta: DeltaRule::Fixed(Delta::Ss),
        params: &[param("eta", 1.0)],
        functions: &[],
        system: SystemForm::Evolution { u_t: "-vxx - 2*(u^2 + v^2)*u", v_t: "uxx + 2*(u^2 + v^2)*v" },
        frame: [["2*v", "-4*eta*v + 2*ux"], ["2*eta", "-4*eta^2 + 2*(u^2 + v^2)"], ["-2*u", "2*eta*u + 2*vx"]],
        conditions: &[],
        data: ["0", "0", "0", "0"],
    },
    CatalogEntry {
        key: "trivial-zero",
        name: "u_xt = 0, v_xt = 0 with a flat frame",
        kind: EntryKind::SolverFixture,
        delta: DeltaRule::Fixed(Delta::Pss),
        params: &[],
        functions: &[],
        system: SystemForm::Given { f: "0", g: "0" },
        frame: [["1", "0"], ["0", "1"], ["0", "0"]],
        conditions: &[],
        data: ["x", "0", "0", "t"],
    },
];
