#pragma once

#define PARISIAN_VERSION "0.1.0"
