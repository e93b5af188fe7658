#pragma once

#include "chartml/client.hpp"

namespace chartml::client {

/// Real network adapter; everything above it is exercised against scripted
/// transports, so this stays a leaf.
class HttpTransport final : public Transport {
public:
    TransportResponse send(const HttpRequest& request) override;
};

}  // namespace chartml::client
