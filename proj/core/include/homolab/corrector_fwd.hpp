#pragma once

namespace homolab {
struct CorrectorSet;
}
