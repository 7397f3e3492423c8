#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace causalqa {

enum class Role { User, Assistant };

std::string_view role_name(Role r) noexcept;

struct ChatMessage {
  Role role = Role::User;
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct Sampling {
  double temperature = 1.0;
  int max_tokens = 256;
};

/// The remote endpoint could not be reached or answered with an error.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Chat-completion backend.  Implementations must allow concurrent calls.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  /// Text of the first choice; throws TransportError on failure.
  virtual std::string complete(const std::vector<ChatMessage>& messages, const Sampling& sampling) = 0;
};

}  // namespace causalqa
