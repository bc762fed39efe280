#pragma once

#define SSC_VERSION "0.1.0"
