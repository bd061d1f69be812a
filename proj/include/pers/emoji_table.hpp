#pragma once

// Bundled emoji -> descriptive-name table. Keys are codepoint sequences in
// hex (space separated for multi-codepoint sequences such as VS16 variants);
// names are snake_case so each emoji survives tokenization as a single token.

#include <array>
#include <cstdint>
#include <string>
#include <utility>

namespace pers {

inline constexpr std::array<std::pair<const char*, const char*>, 135> kDefaultEmojiTable{{
    {"1F600", "grinning_face"},
    {"1F601", "beaming_face_with_smiling_eyes"},
    {"1F602", "face_with_tears_of_joy"},
    {"1F603", "grinning_face_with_big_eyes"},
    {"1F604", "grinning_face_with_smiling_eyes"},
    {"1F605", "grinning_face_with_sweat"},
    {"1F606", "grinning_squinting_face"},
    {"1F607", "smiling_face_with_halo"},
    {"1F608", "smiling_face_with_horns"},
    {"1F609", "winking_face"},
    {"1F60A", "smiling_face_with_smiling_eyes"},
    {"1F60B", "face_savoring_food"},
    {"1F60C", "relieved_face"},
    {"1F60D", "smiling_face_with_heart_eyes"},
    {"1F60E", "smiling_face_with_sunglasses"},
    {"1F60F", "smirking_face"},
    {"1F610", "neutral_face"},
    {"1F612", "unamused_face"},
    {"1F614", "pensive_face"},
    {"1F618", "face_blowing_a_kiss"},
    {"1F61A", "kissing_face_with_closed_eyes"},
    {"1F61C", "winking_face_with_tongue"},
    {"1F61D", "squinting_face_with_tongue"},
    {"1F61E", "disappointed_face"},
    {"1F621", "pouting_face"},
    {"1F622", "crying_face"},
    {"1F624", "face_with_steam_from_nose"},
    {"1F625", "sad_but_relieved_face"},
    {"1F628", "fearful_face"},
    {"1F629", "weary_face"},
    {"1F62A", "sleepy_face"},
    {"1F62B", "tired_face"},
    {"1F62D", "loudly_crying_face"},
    {"1F631", "face_screaming_in_fear"},
    {"1F633", "flushed_face"},
    {"1F634", "sleeping_face"},
    {"1F637", "face_with_medical_mask"},
    {"1F641", "slightly_frowning_face"},
    {"1F642", "slightly_smiling_face"},
    {"1F643", "upside_down_face"},
    {"1F644", "face_with_rolling_eyes"},
    {"1F910", "zipper_mouth_face"},
    {"1F914", "thinking_face"},
    {"1F917", "hugging_face"},
    {"1F921", "clown_face"},
    {"1F923", "rolling_on_the_floor_laughing"},
    {"1F92B", "shushing_face"},
    {"1F92D", "face_with_hand_over_mouth"},
    {"1F92F", "exploding_head"},
    {"1F970", "smiling_face_with_hearts"},
    {"1F973", "partying_face"},
    {"1F975", "hot_face"},
    {"1F976", "cold_face"},
    {"1F97A", "pleading_face"},
    {"1F440", "eyes"},
    {"1F446", "backhand_index_pointing_up"},
    {"1F447", "backhand_index_pointing_down"},
    {"1F448", "backhand_index_pointing_left"},
    {"1F449", "backhand_index_pointing_right"},
    {"1F44A", "oncoming_fist"},
    {"1F44B", "waving_hand"},
    {"1F44C", "ok_hand"},
    {"1F44D", "thumbs_up"},
    {"1F44E", "thumbs_down"},
    {"1F44F", "clapping_hands"},
    {"1F450", "open_hands"},
    {"1F4AA", "flexed_biceps"},
    {"1F64C", "raising_hands"},
    {"1F64F", "folded_hands"},
    {"1F926", "person_facepalming"},
    {"1F937", "person_shrugging"},
    {"1F483", "woman_dancing"},
    {"1F3C3", "person_running"},
    {"1F648", "see_no_evil_monkey"},
    {"1F649", "hear_no_evil_monkey"},
    {"1F64A", "speak_no_evil_monkey"},
    {"2764 FE0F", "red_heart"},
    {"2764", "red_heart"},
    {"1F494", "broken_heart"},
    {"1F495", "two_hearts"},
    {"1F496", "sparkling_heart"},
    {"1F499", "blue_heart"},
    {"1F49A", "green_heart"},
    {"1F49B", "yellow_heart"},
    {"1F49C", "purple_heart"},
    {"1F9E1", "orange_heart"},
    {"1F5A4", "black_heart"},
    {"1F90D", "white_heart"},
    {"1F4A4", "zzz"},
    {"1F4A5", "collision"},
    {"1F4A6", "sweat_droplets"},
    {"1F4A8", "dashing_away"},
    {"1F4A9", "pile_of_poo"},
    {"1F4AF", "hundred_points"},
    {"1F480", "skull"},
    {"1F47B", "ghost"},
    {"1F47D", "alien"},
    {"1F916", "robot"},
    {"1F436", "dog_face"},
    {"1F431", "cat_face"},
    {"1F984", "unicorn"},
    {"1F525", "fire"},
    {"2728", "sparkles"},
    {"2B50", "star"},
    {"1F31F", "glowing_star"},
    {"26A1", "high_voltage"},
    {"2600 FE0F", "sun"},
    {"2600", "sun"},
    {"1F319", "crescent_moon"},
    {"1F308", "rainbow"},
    {"2614", "umbrella_with_rain_drops"},
    {"2744 FE0F", "snowflake"},
    {"2744", "snowflake"},
    {"1F389", "party_popper"},
    {"1F38A", "confetti_ball"},
    {"1F381", "wrapped_gift"},
    {"1F382", "birthday_cake"},
    {"1F355", "pizza"},
    {"1F354", "hamburger"},
    {"2615", "hot_beverage"},
    {"1F37A", "beer_mug"},
    {"1F377", "wine_glass"},
    {"1F3B5", "musical_note"},
    {"1F3B6", "musical_notes"},
    {"1F3A7", "headphone"},
    {"26BD", "soccer_ball"},
    {"1F3C0", "basketball"},
    {"1F697", "automobile"},
    {"2708 FE0F", "airplane"},
    {"2708", "airplane"},
    {"1F680", "rocket"},
    {"1F4F1", "mobile_phone"},
    {"1F4BB", "laptop"},
    {"1F4DA", "books"},
    {"1F4B0", "money_bag"},
}};

// UTF-8 encoding of a single codepoint.
inline std::string utf8_encode(std::uint32_t cp) {
  std::string out;
  if (cp <= 0x7f) {
    out.push_back(char(cp));
  } else if (cp <= 0x7ff) {
    out.push_back(char(0xc0 | (cp >> 6)));
    out.push_back(char(0x80 | (cp & 0x3f)));
  } else if (cp <= 0xffff) {
    out.push_back(char(0xe0 | (cp >> 12)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(char(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(char(0xf0 | (cp >> 18)));
    out.push_back(char(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(char(0x80 | (cp & 0x3f)));
  }
  return out;
}

}  // namespace pers
