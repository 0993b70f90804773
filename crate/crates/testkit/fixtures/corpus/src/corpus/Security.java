package corpus;

import java.util.Random;

public class Security {
    static String token(int len) {
        Random r = new Random();
        StringBuilder sb = new StringBuilder();
        for (int i = 0; i < len; i++) {
            sb.append((char) ('a' + r.nextInt(26)));
        }
        return sb.toString();
    }

    static boolean constantTimeEquals(String a, String b) {
        if (a.length() != b.length()) return false;
        int diff = 0;
        for (int i = 0; i < a.length(); i++) {
            diff |= a.charAt(i) ^ b.charAt(i);
        }
        return diff == 0;
    }

    static String sanitizePath(String p) {
        String s = p.replace("..", "");
        while (s.startsWith("/")) s = s.substring(1);
        return s;
    }

    static class Session {
        private final String user;
        private boolean admin;
        private long expires;

        Session(String user, long expires) {
            this.user = user;
            this.expires = expires;
        }

        boolean valid(long now) {
            return now < expires && user != null;
        }

        boolean canDelete(long now) {
            return valid(now) && admin;
        }

        void promote(String secret) {
            if ("s3cret".equals(secret)) {
                admin = true;
            }
        }
    }

    static class Hasher {
        static int hash(String s) {
            int h = 17;
            for (int i = 0; i < s.length(); i++) {
                h = h * 31 + s.charAt(i);
            }
            return h;
        }
    }
}
