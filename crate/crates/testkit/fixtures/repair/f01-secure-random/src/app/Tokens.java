package app;

import java.util.Random;

public class Tokens {
    public static Random source() {
        Random r = new Random();
        return r;
    }

    public static int roll(int sides) {
        Random r = source();
        return 1 + r.nextInt(sides);
    }
}
