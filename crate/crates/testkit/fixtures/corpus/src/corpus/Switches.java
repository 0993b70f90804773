package corpus;

public class Switches {
    public static int dense(int k) {
        switch (k) {
            case 0: return 10;
            case 1: return 11;
            case 2: return 12;
            case 3: return 13;
            case 5: return 15;
            default: return -1;
        }
    }

    public static int sparse(int k) {
        switch (k) {
            case -1000: return 1;
            case 7: return 2;
            case 100000: return 3;
            default: return 0;
        }
    }

    public static String fallthrough(int k) {
        StringBuilder sb = new StringBuilder();
        switch (k) {
            case 1: sb.append("a");
            case 2: sb.append("b"); break;
            case 3: sb.append("c");
            default: sb.append("d");
        }
        return sb.toString();
    }

    public static int nested(int a, int b) {
        switch (a) {
            case 1:
                switch (b) {
                    case 1: return 11;
                    case 2: return 12;
                }
                return 10;
            case 2:
                return 20;
        }
        return 0;
    }

    static class Dispatcher {
        private int hits;

        int dispatch(char c) {
            switch (c) {
                case 'a': hits++; return 1;
                case 'e': hits += 2; return 2;
                case 'z': return 26;
            }
            return hits;
        }
    }

    static class Router {
        String route(int code) {
            String r;
            switch (code / 100) {
                case 2: r = "ok"; break;
                case 3: r = "redirect"; break;
                case 4: r = "client"; break;
                case 5: r = "server"; break;
                default: r = "unknown";
            }
            return r;
        }
    }
}
