#pragma once

#include "aniso/convex_body.hpp"
#include "aniso/lp.hpp"
#include "aniso/polygon.hpp"
#include "aniso/anisogeom.hpp"
#include "aniso/bessel.hpp"
#include "aniso/mesh.hpp"
#include "aniso/pde_solver.hpp"
#include "aniso/certificates.hpp"
#include "aniso/io.hpp"
#include "aniso/harness.hpp"
